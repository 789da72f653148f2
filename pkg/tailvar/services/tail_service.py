"""
Tail Service for tailvar

This module handles semi-parametric tail estimation: the Hill estimator on the
extreme order statistics of one tail, the adaptive threshold rule, the
small-sample modified Hill estimator (weighted regression of the Hill trace on
the threshold count), the finite-variance test, and Hill/Q-Q plot data.

Tail exponents are on the gamma = 1/alpha scale internally; reports carry both.
"""

import math
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from tailvar.config.settings import FINITE_VARIANCE_Z, HUISMAN_MIN_ETA, PHILLIPS_MIN_OBS
from tailvar.models.domain import TAILS, HillTrace, ReturnSeries, TailEstimate
from tailvar.utils.errors import DataError, EstimationError

# Configure logging
logger = logging.getLogger(__name__)


def floor_power(n: int, power: float) -> int:
    """floor(n ** power), robust to n ** power landing a hair below an integer."""
    return int(math.floor(n ** power + 1e-9))


def implied_pareto_scale(m: int, n: int, threshold: float, gamma: float) -> float:
    """(m/n) * |threshold|^(1/gamma), evaluated in log space; inf when it overflows."""
    if not gamma > 0:
        return math.nan
    log_scale = math.log(m / n) + math.log(abs(threshold)) / gamma
    with np.errstate(over="ignore"):
        return float(np.exp(log_scale))


def order_tail(series: ReturnSeries, tail: str) -> np.ndarray:
    """
    Order the series from the most extreme value of `tail` inwards.

    Ties keep their original order (stable sort), so thresholds are
    deterministic.
    """
    if tail not in TAILS:
        raise DataError(f"Tail must be one of {TAILS}, got {tail!r}")
    key = series.values if tail == "lower" else -series.values
    return series.values[np.argsort(key, kind="stable")]


def tail_count(ordered: np.ndarray, tail: str) -> int:
    """Number of leading order statistics on the correct side of zero."""
    qualifying = ordered < 0 if tail == "lower" else ordered > 0
    if qualifying.all():
        return int(ordered.size)
    return int(np.argmin(qualifying))


class TailService:
    """
    Estimates tail exponents and thresholds for one tail of a return series.
    """

    def __init__(self, finite_variance_z: float = FINITE_VARIANCE_Z):
        """
        Initialize the Tail Service.

        Args:
            finite_variance_z: One-sided critical value for the finite-variance test
        """
        self.finite_variance_z = finite_variance_z
        logger.info("Tail Service initialized")

    def _window(self, series: ReturnSeries, m: int, tail: str) -> np.ndarray:
        ordered = order_tail(series, tail)
        if m < 2:
            raise EstimationError(f"Threshold count m must be at least 2, got {m}")
        if m > ordered.size:
            raise EstimationError(f"m = {m} exceeds the {ordered.size} available observations")
        window = ordered[:m]
        valid = window < 0 if tail == "lower" else window > 0
        if not valid.all():
            side = "nonnegative" if tail == "lower" else "nonpositive"
            raise EstimationError(
                f"m = {m} reaches a {side} value inside the {tail}-tail window "
                f"(only {tail_count(ordered, tail)} qualifying observations)"
            )
        return window

    def _estimate(self, series: ReturnSeries, window: np.ndarray, gamma: float, se: float,
                  tail: str, method: str) -> TailEstimate:
        m = int(window.size)
        threshold = float(window[-1])
        implied_scale = implied_pareto_scale(m, series.n, threshold, gamma)
        return TailEstimate(
            gamma=float(gamma),
            m=m,
            threshold=threshold,
            se_gamma=float(se),
            implied_scale=float(implied_scale),
            tail=tail,
            method=method,
            n=series.n,
        )

    def hill_estimate(self, series: ReturnSeries, m: int, tail: str = "lower",
                      method: str = "fixed") -> TailEstimate:
        """
        Hill estimate from the m most extreme observations of one tail.

        gamma = 1/(m-1) * sum_{i=1..m-1} [ln|r_i| - ln|r_m|], with the threshold
        at the m-th order statistic and se = gamma / sqrt(m).

        Args:
            series: The return series
            m: Threshold count
            tail: "lower" or "upper"
            method: Label recorded on the estimate

        Returns:
            The tail estimate
        """
        window = self._window(series, int(m), tail)
        logs = np.log(np.abs(window))
        gamma = float(np.sum(logs[:-1] - logs[-1]) / (window.size - 1))
        return self._estimate(series, window, gamma, gamma / math.sqrt(window.size), tail, method)

    def hill_trace(self, series: ReturnSeries, eta: int, tail: str = "lower") -> HillTrace:
        """
        Hill estimates for every threshold count m = 2 ... eta.

        Args:
            series: The return series
            eta: Largest threshold count
            tail: "lower" or "upper"

        Returns:
            The Hill trace
        """
        if eta < 2:
            raise EstimationError(f"eta must be at least 2, got {eta}")
        logs = np.log(np.abs(self._window(series, int(eta), tail)))
        m = np.arange(2, eta + 1)
        partial = np.cumsum(logs)[:-1]
        gamma = partial / (m - 1) - logs[1:]
        # exact zero on tied windows
        gamma = np.maximum(gamma, 0.0)
        return HillTrace(m=m, gamma=gamma, se=gamma / np.sqrt(m))

    def phillips_threshold(self, series: ReturnSeries, tail: str = "lower") -> int:
        """
        Adaptive threshold count m = round(lambda * n^(2/3)).

        lambda = |(g1 / sqrt 2) * (n^(1/3) / m2) / (g1 - g2)|^(2/3) from pilot Hill
        estimates g1 at m1 = floor(n^(2/3)) and g2 at m2 = floor(n^(4/5)). Equal
        pilots fall back to m1. The result is clamped to [2, n/2] and to the
        number of observations in the tail.

        Args:
            series: The return series
            tail: "lower" or "upper"

        Returns:
            The threshold count
        """
        series.require(PHILLIPS_MIN_OBS, "Adaptive threshold selection")
        n = series.n
        m1 = floor_power(n, 2.0 / 3.0)
        m2 = floor_power(n, 4.0 / 5.0)
        available = tail_count(order_tail(series, tail), tail)
        if m2 > available:
            raise EstimationError(
                f"Pilot estimates need {m2} {tail}-tail observations, only {available} available"
            )

        g1 = self.hill_estimate(series, m1, tail).gamma
        g2 = self.hill_estimate(series, m2, tail).gamma
        if g1 == g2:
            logger.warning("Pilot Hill estimates coincide; using m = floor(n^(2/3))")
            return m1

        lam = abs((g1 / math.sqrt(2.0)) * (n ** (1.0 / 3.0) / m2) / (g1 - g2)) ** (2.0 / 3.0)
        m = int(round(lam * n ** (2.0 / 3.0)))
        m = min(max(m, 2), n // 2, available)
        logger.info(f"Adaptive threshold: lambda={lam:.4f}, m={m} (pilots {m1}, {m2})")
        return m

    def phillips_estimate(self, series: ReturnSeries, tail: str = "lower") -> TailEstimate:
        """Hill estimate at the adaptive threshold count."""
        return self.hill_estimate(series, self.phillips_threshold(series, tail), tail, method="phillips")

    def huisman_from_trace(self, trace: HillTrace) -> Tuple[float, float, int]:
        """
        Weighted least-squares intercept of a Hill trace.

        Fits gamma(m) = b0 + b1 * m with weights sqrt(m); b0 is the estimate with
        the small-sample bias removed.

        Args:
            trace: Hill estimates over m

        Returns:
            (b0, standard error of b0, smallest m whose gamma(m) is closest to b0)
        """
        m = trace.m.astype(float)
        g = trace.gamma
        if m.size < 3:
            raise EstimationError("The modified Hill regression needs at least 3 trace points")

        root_w = np.sqrt(np.sqrt(m))
        design = np.column_stack([np.ones_like(m), m])
        coef, _, rank, _ = np.linalg.lstsq(design * root_w[:, None], g * root_w, rcond=None)
        if rank < 2:
            raise EstimationError("The modified Hill regression is rank deficient")

        residuals = g - design @ coef
        weights = root_w ** 2
        dof = m.size - 2
        s2 = float(np.sum(weights * residuals ** 2) / dof) if dof > 0 else 0.0
        cov = s2 * np.linalg.inv(design.T @ (design * weights[:, None]))
        se = math.sqrt(max(float(cov[0, 0]), 0.0))

        b0 = float(coef[0])
        m_hkkp = int(trace.m[int(np.argmin(np.abs(g - b0)))])
        return b0, se, m_hkkp

    def huisman_estimate(self, series: ReturnSeries, eta: Optional[int] = None,
                         tail: str = "lower") -> TailEstimate:
        """
        Small-sample modified Hill estimate.

        Args:
            series: The return series
            eta: Largest threshold count in the regression (default: half of the
                observations on the tail's side of zero)
            tail: "lower" or "upper"

        Returns:
            The tail estimate, anchored at the reported m_hkkp
        """
        ordered = order_tail(series, tail)
        if eta is None:
            eta = tail_count(ordered, tail) // 2
        if eta < HUISMAN_MIN_ETA:
            raise EstimationError(f"The modified Hill estimator needs eta >= {HUISMAN_MIN_ETA}, got {eta}")

        trace = self.hill_trace(series, int(eta), tail)
        b0, se, m_hkkp = self.huisman_from_trace(trace)
        if not b0 > 0:
            raise EstimationError(f"Modified Hill intercept {b0:.4g} is not positive; tail is not heavy")

        logger.debug(f"Modified Hill: gamma={b0:.4f} (se {se:.4f}), m_hkkp={m_hkkp}, eta={eta}")
        return self._estimate(series, ordered[:m_hkkp], b0, se, tail, "huisman")

    def reanchor(self, est: TailEstimate, series: ReturnSeries, m: int) -> TailEstimate:
        """
        Move an estimate's threshold to the m-th order statistic, keeping gamma.

        Args:
            est: The estimate to re-anchor
            series: The series it was computed on
            m: New threshold count

        Returns:
            The re-anchored estimate
        """
        window = self._window(series, int(m), est.tail)
        return self._estimate(series, window, est.gamma, est.se_gamma, est.tail, est.method)

    def estimate(self, series: ReturnSeries, method: str, tail: str = "lower",
                 m: Optional[int] = None, eta: Optional[int] = None) -> TailEstimate:
        """Dispatch to the named estimation method."""
        if method == "fixed":
            if m is None:
                m = floor_power(series.n, 2.0 / 3.0)
            return self.hill_estimate(series, m, tail)
        if method == "phillips":
            return self.phillips_estimate(series, tail)
        if method == "huisman":
            return self.huisman_estimate(series, eta, tail)
        raise DataError(f"Unknown tail method {method!r}")

    def finite_variance_test(self, est: TailEstimate) -> Tuple[float, bool]:
        """
        One-sided test of alpha > 2 (finite second moment).

        z = (alpha - 2) / se_alpha with se_alpha = alpha^2 * se_gamma.

        Args:
            est: A non-degenerate tail estimate

        Returns:
            (z statistic, whether a finite variance is supported at 5%)
        """
        est.require_positive()
        diff = est.alpha - 2.0
        se_alpha = est.se_alpha
        if diff == 0:
            z = 0.0
        elif se_alpha == 0:
            z = math.copysign(math.inf, diff)
        else:
            z = diff / se_alpha
        return float(z), bool(z > self.finite_variance_z)

    def tail_report(self, est: TailEstimate) -> Dict[str, Any]:
        """Estimate on both the gamma and alpha scales plus the finite-variance test."""
        report = est.to_dict()
        if est.gamma > 0:
            z, finite = self.finite_variance_test(est)
            report.update({"finite_variance_z": z, "finite_variance": finite})
        report["scale"] = {"gamma": "1/alpha", "alpha": "tail index"}
        return report

    def qq_normal_data(self, series: ReturnSeries) -> pd.DataFrame:
        """
        Normal Q-Q pairs.

        The i-th order statistic is paired with mean + sd * Phi^-1((i - 0.5)/n),
        using the sample mean and sd.

        Args:
            series: The return series

        Returns:
            DataFrame with columns normal_q, empirical_q
        """
        series.require(3, "A normal Q-Q plot")
        x = np.sort(series.values, kind="stable")
        n = x.size
        probs = (np.arange(1, n + 1) - 0.5) / n
        normal_q = np.mean(x) + np.std(x, ddof=1) * stats.norm.ppf(probs)
        return pd.DataFrame({"normal_q": normal_q, "empirical_q": x})

    def regular_variation_ratio(self, series: ReturnSeries, t: float, r: float,
                                tail: str = "lower") -> float:
        """
        Empirical (1 - F(t r)) / (1 - F(t)) for tail magnitudes.

        For a regularly varying tail this approaches r^(-alpha) as t grows.
        """
        if not (t > 0 and r > 0):
            raise DataError("t and r must be positive")
        magnitudes = -series.values if tail == "lower" else series.values
        base = np.count_nonzero(magnitudes > t)
        if base == 0:
            raise EstimationError(f"No {tail}-tail observations beyond {t}")
        return float(np.count_nonzero(magnitudes > t * r) / base)
