"""
Monte Carlo Service for tailvar

This module runs the scaling simulation: GARCH(1,1) paths with standardized
Student-t innovations, the modified Hill estimate on each path's lower tail,
extreme-value quantiles at each tail probability scaled to every horizon with
the path's own tail index, and a comparison against quantiles of pooled
non-overlapping multi-day sums.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional, Tuple

import numpy as np

from tailvar.config.settings import MC_MAX_FAILURE_RATE, THREADS
from tailvar.data.reference_values import REFERENCE_CONFIG, REFERENCE_PREDICTED
from tailvar.models.domain import McConfig, McReport, McRow, ReturnSeries
from tailvar.services.tail_service import TailService
from tailvar.services.var_service import VarService
from tailvar.utils.errors import EstimationError, TailVarError
from tailvar.utils.random_streams import replication_stream, std_t_draws

# Configure logging
logger = logging.getLogger(__name__)

# (tail index, {(p, horizon): prediction}) or None for a failed replication
Replication = Optional[Tuple[float, Dict[Tuple[float, int], float]]]


def block_sums(values: np.ndarray, horizon: int) -> np.ndarray:
    """Sums over consecutive non-overlapping blocks of `horizon` observations."""
    usable = (values.size // horizon) * horizon
    return values[:usable].reshape(-1, horizon).sum(axis=1)


def matches_reference(config: McConfig) -> bool:
    """Whether the configuration is the one the published reference values were produced with."""
    return all(
        math.isclose(float(getattr(config, key)), float(value))
        for key, value in REFERENCE_CONFIG.items()
    )


class McService:
    """
    Runs the GARCH-t scaling simulation.
    """

    def __init__(self, workers: int = THREADS, tail_service: Optional[TailService] = None,
                 var_service: Optional[VarService] = None):
        """
        Initialize the Monte Carlo Service.

        Args:
            workers: Number of worker threads for replications
            tail_service: Tail service (optional)
            var_service: VaR service (optional)
        """
        self.workers = max(1, int(workers))
        self.tail_service = tail_service or TailService()
        self.var_service = var_service or VarService(self.tail_service)
        logger.info(f"Monte Carlo Service initialized with {self.workers} workers")

    def simulate_garch_t(self, config: McConfig, rep_index: int) -> ReturnSeries:
        """
        Simulate one GARCH(1,1) path with standardized Student-t innovations.

        sigma_t^2 = a0 + a1 * eps_{t-1}^2 + b1 * sigma_{t-1}^2 and eps_t = sigma_t * z_t,
        started at the unconditional variance. The first `burn_in` draws are
        discarded.

        Args:
            config: Simulation configuration
            rep_index: Replication index selecting the random stream

        Returns:
            The simulated path of length config.n
        """
        rng = replication_stream(config.seed, rep_index)
        total = config.n + config.burn_in
        z = std_t_draws(rng, total, config.df)

        eps = np.empty(total)
        var = config.a0 / (1.0 - config.a1 - config.b1)
        prev_eps2 = var
        a0, a1, b1 = config.a0, config.a1, config.b1
        for t in range(total):
            var = a0 + a1 * prev_eps2 + b1 * var
            eps[t] = math.sqrt(var) * z[t]
            prev_eps2 = eps[t] * eps[t]

        return ReturnSeries(eps[config.burn_in:])

    def _replicate(self, config: McConfig, rep_index: int) -> Tuple[np.ndarray, Replication]:
        path = self.simulate_garch_t(config, rep_index)
        try:
            est = self.tail_service.huisman_estimate(path)
            est = self.var_service.ensure_extrapolation(est, path, max(config.probabilities))
            predictions = {}
            for p in config.probabilities:
                single = self.var_service.evt_var_unconditional(est, path.n, p)
                for h in config.horizons:
                    scaled = single if h == 1 else self.var_service.scale_var(single, h, est.alpha)
                    predictions[(p, h)] = scaled.var_pct
        except TailVarError as e:
            logger.warning(f"Replication {rep_index} failed: {str(e)}")
            return path.values, None
        return path.values, (est.alpha, predictions)

    def _run_replications(self, config: McConfig) -> List[Tuple[np.ndarray, Replication]]:
        if self.workers == 1 or config.reps == 1:
            return [self._replicate(config, i) for i in range(config.reps)]

        results: List[Optional[Tuple[np.ndarray, Replication]]] = [None] * config.reps
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(self._replicate, config, i): i for i in range(config.reps)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
        return results

    def run_mc(self, config: McConfig) -> McReport:
        """
        Run every replication and aggregate the predictions.

        The empirical value for (p, h) is the loss quantile at p of the
        non-overlapping h-day sums pooled across all simulated paths. The
        theoretical value scales the pooled single-period quantile by
        h^(1/df), the tail index of the innovations.

        Args:
            config: Simulation configuration

        Returns:
            The Monte Carlo report
        """
        logger.info(f"Running {config.reps} replications of n={config.n} "
                    f"(a0={config.a0}, a1={config.a1}, b1={config.b1}, seed={config.seed})")
        results = self._run_replications(config)

        paths = [values for values, _ in results]
        succeeded = [outcome for _, outcome in results if outcome is not None]
        failures = config.reps - len(succeeded)
        if failures > MC_MAX_FAILURE_RATE * config.reps:
            raise EstimationError(
                f"{failures} of {config.reps} replications failed, above the "
                f"{MC_MAX_FAILURE_RATE:.0%} limit"
            )
        if not succeeded:
            raise EstimationError("No replication completed")

        pooled_single = np.concatenate(paths)
        reference = matches_reference(config)
        predictions: Dict[Tuple[float, int], np.ndarray] = {}
        rows = []
        for p in config.probabilities:
            single_empirical = -float(np.quantile(pooled_single, p))
            for h in config.horizons:
                pred = np.array([outcome[1][(p, h)] for outcome in succeeded])
                predictions[(p, h)] = pred
                pooled = np.concatenate([block_sums(values, h) for values in paths])
                empirical = -float(np.quantile(pooled, p))
                rows.append(McRow(
                    p=p,
                    horizon=h,
                    mean_pred=float(np.mean(pred)),
                    sd_pred=float(np.std(pred, ddof=1)) if pred.size > 1 else 0.0,
                    empirical=empirical,
                    theoretical=single_empirical * h ** (1.0 / config.df),
                    rel_error=float(np.mean(np.abs(pred - empirical)) / empirical),
                    paper_ref=REFERENCE_PREDICTED.get((p, h)) if reference else None,
                ))

        alphas = np.array([outcome[0] for outcome in succeeded])
        logger.info(f"Monte Carlo finished: {len(succeeded)} completed, {failures} failed, "
                    f"mean alpha {np.mean(alphas):.3f}")
        return McReport(
            config=config,
            rows=tuple(rows),
            completed=len(succeeded),
            failures=failures,
            predictions=predictions,
            alphas=alphas,
        )
