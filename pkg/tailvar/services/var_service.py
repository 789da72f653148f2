"""
VaR Service for tailvar

This module is the quantile engine: unconditional extreme-value VaR from a tail
estimate, conditional VaR from a GARCH forecast and the tail of its filtered
residuals, Gaussian conditional baselines, and multi-period scaling (alpha-root
for the extreme-value measures, square-root for the Gaussian one).

VaR is always reported as a positive loss in percent.
"""

import math
import logging
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd
from scipy import stats

from tailvar.models.domain import GarchFit, ReturnSeries, TailEstimate, VarEstimate
from tailvar.services.tail_service import TailService
from tailvar.utils.errors import DataError, EstimationError

# Configure logging
logger = logging.getLogger(__name__)


def confidence_label(p: float) -> str:
    """Column label for a tail probability, e.g. 0.005 -> 'p99.5'."""
    return f"p{round(100.0 * (1.0 - p), 6):g}"


class VarService:
    """
    Computes single- and multi-period Value-at-Risk estimates.
    """

    def __init__(self, tail_service: Optional[TailService] = None):
        """
        Initialize the VaR Service.

        Args:
            tail_service: Tail service used to re-anchor estimates (optional)
        """
        self.tail_service = tail_service or TailService()
        logger.info("VaR Service initialized")

    def evt_var_unconditional(self, est: TailEstimate, n: int, p: float) -> VarEstimate:
        """
        Extreme-value loss quantile |r_m| * (m / (n p))^gamma.

        Only valid when p <= m/n, i.e. when the quantile lies beyond the
        threshold; p = m/n returns the threshold itself.

        Args:
            est: Lower-tail estimate
            n: Sample size the estimate was computed on
            p: Tail probability

        Returns:
            The single-period VaR
        """
        est.require_positive()
        if est.tail != "lower":
            raise EstimationError("Loss quantiles need a lower-tail estimate")
        if not 0 < p < 1:
            raise DataError(f"Tail probability must lie in (0, 1), got {p}")
        if n < est.m:
            raise DataError(f"Sample size {n} is smaller than the threshold count {est.m}")

        share = est.m / n
        if math.isclose(p, share, rel_tol=1e-12):
            logger.warning(f"p = {p} sits exactly on the threshold (m/n); VaR equals the threshold value")
            ratio = 1.0
        elif p > share:
            raise EstimationError(
                f"p = {p} exceeds m/n = {share:.6g}: the quantile is interior, use the empirical quantile"
            )
        else:
            ratio = est.m / (n * p)

        var_pct = abs(est.threshold) * ratio ** est.gamma
        return VarEstimate(p=p, horizon_n=1, var_pct=float(var_pct), method="evt_unconditional",
                           scale_q=1.0, alpha_used=est.alpha)

    def scale_var(self, v: VarEstimate, horizon_n: int, alpha: float) -> VarEstimate:
        """
        Scale a single-period VaR to `horizon_n` days by q = horizon_n^(1/alpha).

        Args:
            v: Single-period estimate
            horizon_n: Horizon in days
            alpha: Tail index

        Returns:
            The multi-period estimate
        """
        if v.horizon_n != 1:
            raise DataError("Only single-period estimates can be scaled")
        if not alpha > 0:
            raise DataError(f"Tail index must be positive, got {alpha}")
        if horizon_n < 1:
            raise DataError(f"Horizon must be at least 1, got {horizon_n}")
        q = float(horizon_n) ** (1.0 / alpha)
        return VarEstimate(p=v.p, horizon_n=int(horizon_n), var_pct=v.var_pct * q, method=v.method,
                           scale_q=q, alpha_used=alpha)

    def evt_var_conditional(self, fit: GarchFit, z_est: TailEstimate, n: int, p: float,
                            horizon_n: int = 1) -> VarEstimate:
        """
        Conditional extreme-value VaR from the one-step GARCH forecast.

        The single-period return quantile is mu_{n+1} + sigma_{n+1} * z_p, with
        z_p the (negative) lower-tail quantile of the filtered residuals; the
        loss is its negation. Longer horizons scale the whole single-period
        loss by horizon^(1/alpha) with alpha from the residual tail.

        Args:
            fit: Fitted GARCH model
            z_est: Lower-tail estimate on fit.z
            n: Number of residuals the estimate was computed on
            p: Tail probability
            horizon_n: Horizon in days

        Returns:
            The conditional VaR
        """
        z_quantile = -self.evt_var_unconditional(z_est, n, p).var_pct
        r_hat = fit.mu_next + fit.sigma_next * z_quantile
        var_pct = -r_hat
        if var_pct < 0:
            logger.warning(f"Forecast mean dominates the tail at p = {p}; reporting a zero-loss VaR")
            var_pct = 0.0

        single = VarEstimate(p=p, horizon_n=1, var_pct=float(var_pct), method="evt_conditional",
                             scale_q=1.0, alpha_used=z_est.alpha)
        if horizon_n == 1:
            return single
        return self.scale_var(single, horizon_n, z_est.alpha)

    def gaussian_var_conditional(self, fit: GarchFit, p: float, horizon_n: int = 1) -> VarEstimate:
        """
        Conditional VaR from a Gaussian GARCH fit with square-root-of-time scaling.

        Args:
            fit: GARCH model fitted with normal innovations
            p: Tail probability
            horizon_n: Horizon in days

        Returns:
            The conditional VaR
        """
        if fit.params.innovation != "normal":
            raise DataError("The Gaussian baseline needs a GARCH fit with normal innovations")
        if not 0 < p < 1:
            raise DataError(f"Tail probability must lie in (0, 1), got {p}")
        if horizon_n < 1:
            raise DataError(f"Horizon must be at least 1, got {horizon_n}")

        var_pct = -(fit.mu_next + fit.sigma_next * float(stats.norm.ppf(p)))
        if var_pct < 0:
            logger.warning(f"Forecast mean dominates the tail at p = {p}; reporting a zero-loss VaR")
            var_pct = 0.0
        q = math.sqrt(horizon_n)
        return VarEstimate(p=p, horizon_n=int(horizon_n), var_pct=float(var_pct * q),
                           method="gaussian_conditional", scale_q=q, alpha_used=None)

    def ensure_extrapolation(self, est: TailEstimate, series: ReturnSeries, p_max: float,
                             allow_reanchor: bool = True) -> TailEstimate:
        """
        Re-anchor an estimate so that every requested p satisfies p <= m/n.

        Args:
            est: Tail estimate
            series: The series the estimate came from
            p_max: Largest tail probability that will be requested
            allow_reanchor: False when the threshold count was chosen by the caller

        Returns:
            The estimate, re-anchored at ceil(n * p_max) when its own m is too small
        """
        needed = int(math.ceil(series.n * p_max - 1e-9))
        if est.m >= needed:
            return est
        if not allow_reanchor:
            raise EstimationError(
                f"p = {p_max} exceeds m/n = {est.m}/{series.n}; the threshold count is fixed, "
                f"use m >= {needed} or drop p"
            )
        logger.warning(f"Threshold count {est.m} makes p = {p_max} interior; anchoring at m = {needed}")
        return self.tail_service.reanchor(est, series, needed)

    def unconditional_grid(self, est: TailEstimate, n: int, probabilities: Iterable[float],
                           horizons: Iterable[int]) -> List[VarEstimate]:
        """Unconditional VaR for every (p, horizon) pair."""
        grid = []
        for p in probabilities:
            single = self.evt_var_unconditional(est, n, p)
            grid.extend(single if h == 1 else self.scale_var(single, h, est.alpha) for h in horizons)
        return grid

    def conditional_grid(self, fit: GarchFit, z_est: TailEstimate, probabilities: Iterable[float],
                         horizons: Iterable[int]) -> List[VarEstimate]:
        """Conditional extreme-value VaR for every (p, horizon) pair."""
        return [self.evt_var_conditional(fit, z_est, fit.n, p, h) for p in probabilities for h in horizons]

    def gaussian_grid(self, fit: GarchFit, probabilities: Iterable[float],
                      horizons: Iterable[int]) -> List[VarEstimate]:
        """Gaussian conditional VaR for every (p, horizon) pair."""
        return [self.gaussian_var_conditional(fit, p, h) for p in probabilities for h in horizons]

    def var_grid(self, method: str, probabilities: Iterable[float], horizons: Iterable[int],
                 est: Optional[TailEstimate] = None, n: Optional[int] = None,
                 fit: Optional[GarchFit] = None) -> List[VarEstimate]:
        """
        (p x horizon) grid for one VaR method.

        Args:
            method: "evt_unconditional", "evt_conditional" or "gaussian_conditional"
            probabilities: Tail probabilities
            horizons: Horizons in days
            est: Tail estimate (on the returns, or on fit.z for the conditional method)
            n: Sample size of the unconditional estimate (defaults to est.n)
            fit: GARCH fit for the conditional methods

        Returns:
            The grid, ordered by p then horizon
        """
        probabilities, horizons = list(probabilities), list(horizons)
        if method == "evt_unconditional":
            if est is None:
                raise DataError("The unconditional grid needs a tail estimate")
            return self.unconditional_grid(est, est.n if n is None else n, probabilities, horizons)
        if method == "evt_conditional":
            if est is None or fit is None:
                raise DataError("The conditional grid needs a GARCH fit and a residual tail estimate")
            return self.conditional_grid(fit, est, probabilities, horizons)
        if method == "gaussian_conditional":
            if fit is None:
                raise DataError("The Gaussian grid needs a GARCH fit")
            return self.gaussian_grid(fit, probabilities, horizons)
        raise DataError(f"Unknown VaR method {method!r}")

    def to_frame(self, grid: List[VarEstimate]) -> pd.DataFrame:
        columns = ["method", "p", "horizon", "var_pct", "scale_q", "alpha_used"]
        return pd.DataFrame([v.to_dict() for v in grid], columns=columns)

    def to_layout(self, grid: List[VarEstimate]) -> Dict[str, Any]:
        """
        Arrange a grid as single-period and multi-period blocks per confidence level.

        Returns:
            {"method": ..., "single_period": {"p95": ...},
             "multi_period": {"p95": {"2": ..., "4": ...}}, "alpha_used": {...}}
        """
        layout: Dict[str, Any] = {
            "method": grid[0].method if grid else None,
            "single_period": {},
            "multi_period": {},
            "alpha_used": {},
        }
        for v in grid:
            label = confidence_label(v.p)
            if v.horizon_n == 1:
                layout["single_period"][label] = round(v.var_pct, 6)
            else:
                layout["multi_period"].setdefault(label, {})[str(v.horizon_n)] = round(v.var_pct, 6)
            layout["alpha_used"][label] = v.alpha_used
        return layout
