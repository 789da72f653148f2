"""
GARCH Service for tailvar

This module handles the AR(1)-GARCH(1,1) filter with standardized Student-t (or
Gaussian) innovations: likelihood, constrained maximum likelihood fitting,
filtering to the residual series Z, one-step forecasts and stationarity checks.

Model, for t = 2 ... n:
    mu_t      = c + phi * r_{t-1}
    sigma_t^2 = a0 + a1 * eps_{t-1}^2 + b1 * sigma_{t-1}^2,   eps_t = r_t - mu_t
    z_t       = eps_t / sigma_t

The first observation seeds the recursion (mu_1 = c / (1 - phi), sigma_1^2 = the
sample variance) and is excluded from the likelihood.
"""

import math
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special
from scipy.signal import lfilter
from statsmodels.tools.numdiff import approx_hess
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from tailvar.config.settings import (
    GARCH_BOUNDARY_TOL, GARCH_CONFIG_FILE, GARCH_MAX_ITER, GARCH_MIN_OBS,
    LJUNG_BOX_LAGS, QUADRATURE_BOUND, T_DF
)
from tailvar.models.domain import GarchFit, GarchParams, ReturnSeries, StationarityCheck
from tailvar.services.series_service import SeriesService
from tailvar.utils.errors import DataError, EstimationError
from tailvar.utils.file_helpers import load_json_file

# Configure logging
logger = logging.getLogger(__name__)

PARAM_NAMES = ("c", "phi", "a0", "a1", "b1")
_PENALTY = 1e10


def std_t_logdensity(z, df: float = T_DF):
    """
    Log density of the unit-variance Student-t with `df` degrees of freedom.

    For df = 4 this is log of Gamma(2.5) / (Gamma(2) sqrt(2 pi)) * (1 + z^2/2)^(-2.5).
    """
    z = np.asarray(z, dtype=float)
    const = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * math.log((df - 2) * math.pi)
    return const - (df + 1) / 2 * np.log1p(z ** 2 / (df - 2))


def normal_logdensity(z):
    z = np.asarray(z, dtype=float)
    return -0.5 * math.log(2 * math.pi) - 0.5 * z ** 2


def innovation_logdensity(params: GarchParams):
    """Log density of the innovations assumed by `params`."""
    if params.innovation == "normal":
        return normal_logdensity
    return lambda z: std_t_logdensity(z, params.df)


def _recursion(params: GarchParams, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Conditional means, variances and mean-equation residuals."""
    mu = np.empty_like(r)
    mu[0] = params.c / (1.0 - params.phi)
    mu[1:] = params.c + params.phi * r[:-1]
    eps = r - mu

    sigma2 = np.empty_like(r)
    sigma2[0] = np.var(r)
    if r.size > 1:
        drive = params.a0 + params.a1 * eps[:-1] ** 2
        sigma2[1:], _ = lfilter([1.0], [1.0, -params.b1], drive, zi=[params.b1 * sigma2[0]])
    return mu, sigma2, eps


def _loglik_value(params: GarchParams, r: np.ndarray) -> float:
    _, sigma2, eps = _recursion(params, r)
    sigma2 = sigma2[1:]
    logdensity = innovation_logdensity(params)
    with np.errstate(all="ignore"):
        z = eps[1:] / np.sqrt(sigma2)
        return float(np.sum(logdensity(z) - 0.5 * np.log(sigma2)))


class GarchService:
    """
    Fits and applies the AR(1)-GARCH(1,1) filter.
    """

    def __init__(self, innovation: str = "t", df: float = T_DF, max_iter: int = GARCH_MAX_ITER,
                 boundary_tol: float = GARCH_BOUNDARY_TOL):
        """
        Initialize the GARCH Service.

        Args:
            innovation: "t" for standardized Student-t, "normal" for Gaussian
            df: Degrees of freedom of the t innovations (fixed, not estimated)
            max_iter: Iteration cap per optimizer run
            boundary_tol: Distance from a1 + b1 = 1 below which a fit is flagged
        """
        if innovation not in ("t", "normal"):
            raise DataError(f"Unknown innovation {innovation!r}")
        self.innovation = innovation
        self.df = df
        self.max_iter = max_iter
        self.boundary_tol = boundary_tol
        self.optimizer_config = self._load_optimizer_config()
        self.series_service = SeriesService()
        logger.info(f"GARCH Service initialized with {innovation} innovations")

    def _load_optimizer_config(self) -> Dict:
        """
        Load starting points and fallback optimizer methods from the config file.

        Returns:
            The optimizer configuration dictionary
        """
        config = load_json_file(GARCH_CONFIG_FILE)
        if not config or not config.get("starts") or not config.get("methods"):
            logger.error(f"Failed to load optimizer configuration from {GARCH_CONFIG_FILE}")
            raise ValueError(f"Failed to load optimizer configuration from {GARCH_CONFIG_FILE}")
        return config

    def std_t_logdensity(self, z):
        return std_t_logdensity(z, self.df)

    def garch_loglik(self, params: GarchParams, series: ReturnSeries) -> float:
        """
        Log-likelihood of the series under `params`, summed over t = 2 ... n.

        Args:
            params: Model parameters (must satisfy a1 + b1 < 1)
            series: The return series

        Returns:
            The log-likelihood
        """
        series.require(2, "The GARCH likelihood")
        if not params.is_stationary:
            raise EstimationError(f"a1 + b1 = {params.persistence} violates a1 + b1 < 1")
        value = _loglik_value(params, series.values)
        if not math.isfinite(value):
            raise EstimationError("GARCH likelihood is not finite for these parameters")
        return value

    def garch_filter(self, params: GarchParams, series: ReturnSeries) -> Tuple[np.ndarray, np.ndarray]:
        """
        Filter a series to conditional standard deviations and residuals.

        r_t = mu_t + sigma_t * z_t holds for every t, including the seed
        observation.

        Args:
            params: Model parameters
            series: The return series

        Returns:
            (sigma path, z path), each of length n
        """
        mu, sigma2, eps = _recursion(params, series.values)
        with np.errstate(all="ignore"):
            sigma = np.sqrt(sigma2)
            z = eps / sigma
        if not (np.all(np.isfinite(sigma)) and np.all(sigma > 0) and np.all(np.isfinite(z))):
            raise EstimationError("GARCH recursion produced non-finite or non-positive volatilities")
        return sigma, z

    def forecast(self, params: GarchParams, series: ReturnSeries) -> Tuple[float, float]:
        """One-step forecasts (mu_{n+1}, sigma_{n+1})."""
        mu, sigma2, eps = _recursion(params, series.values)
        mu_next = params.c + params.phi * series.values[-1]
        sigma2_next = params.a0 + params.a1 * eps[-1] ** 2 + params.b1 * sigma2[-1]
        return float(mu_next), float(math.sqrt(sigma2_next))

    def stationarity_check(self, params: GarchParams) -> StationarityCheck:
        """
        Check a1 + b1 < 1 and the strict-stationarity integral.

        The integral of ln|a1 z^2 + b1| g(z) over the real line, with g the
        innovation density, is evaluated by adaptive quadrature on
        [-bound, bound] plus the two infinite tails.

        Args:
            params: Model parameters

        Returns:
            The check result
        """
        sum_ok = params.is_stationary
        if params.a1 == 0 and params.b1 == 0:
            logger.warning("a1 = b1 = 0: the stationarity integrand is -inf everywhere")
            return StationarityCheck(sum_ok=sum_ok, eq12_integral=-math.inf, eq12_ok=True, degenerate=True)

        logdensity = innovation_logdensity(params)
        a1, b1 = params.a1, params.b1

        def integrand(z: float) -> float:
            return math.log(abs(a1 * z * z + b1)) * math.exp(float(logdensity(z)))

        bound = QUADRATURE_BOUND
        points = [0.0] if b1 == 0 else None
        central, _ = integrate.quad(integrand, -bound, bound, points=points, limit=200, epsabs=1e-12, epsrel=1e-10)
        upper, _ = integrate.quad(integrand, bound, np.inf, limit=200, epsabs=1e-13)
        # symmetric density
        value = central + 2.0 * upper
        return StationarityCheck(sum_ok=sum_ok, eq12_integral=float(value), eq12_ok=bool(value < 0 and params.a0 > 0))

    def _to_params(self, theta: np.ndarray) -> GarchParams:
        persistence = special.expit(theta[3])
        share = special.expit(theta[4])
        return GarchParams(
            c=float(theta[0]),
            phi=float(np.tanh(theta[1])),
            a0=float(np.exp(theta[2])),
            a1=float(persistence * share),
            b1=float(persistence * (1.0 - share)),
            df=self.df,
            innovation=self.innovation,
        )

    def _starting_points(self, r: np.ndarray) -> List[np.ndarray]:
        variance = float(np.var(r))
        starts = []
        for start in self.optimizer_config["starts"]:
            a1, b1 = float(start["a1"]), float(start["b1"])
            persistence = a1 + b1
            starts.append(np.array([
                float(np.mean(r)),
                0.0,
                math.log(variance * (1.0 - persistence)),
                special.logit(persistence),
                special.logit(a1 / persistence),
            ]))
        return starts

    def _objective(self, theta: np.ndarray, r: np.ndarray) -> float:
        try:
            value = _loglik_value(self._to_params(theta), r)
        except DataError:
            return _PENALTY
        if not math.isfinite(value):
            return _PENALTY
        return -value / r.size

    def _minimize(self, theta0: np.ndarray, r: np.ndarray, method: str) -> optimize.OptimizeResult:
        options = {"maxiter": self.max_iter}
        kwargs = {}
        if method == "BFGS":
            kwargs["jac"] = "3-point"
            options["gtol"] = 1e-7
        elif method == "Nelder-Mead":
            options.update({"xatol": 1e-8, "fatol": 1e-12})
        result = optimize.minimize(self._objective, theta0, args=(r,), method=method, options=options, **kwargs)
        # BFGS status 2 is precision loss near an optimum
        converged = result.success or (method == "BFGS" and result.status == 2)
        if not converged or not math.isfinite(result.fun) or result.fun >= _PENALTY:
            raise EstimationError(f"{method} did not converge: {result.message}")
        return result

    def _optimize_start(self, theta0: np.ndarray, r: np.ndarray) -> optimize.OptimizeResult:
        """Run one start, falling back through the configured methods on failure."""
        methods = self.optimizer_config["methods"]
        for attempt in Retrying(
            stop=stop_after_attempt(len(methods)),
            retry=retry_if_exception_type(EstimationError),
            before_sleep=before_sleep_log(logger, logging.WARNING),
            reraise=True,
        ):
            with attempt:
                method = methods[attempt.retry_state.attempt_number - 1]
                return self._minimize(theta0, r, method)

    def _hessian(self, params: GarchParams, r: np.ndarray) -> Optional[np.ndarray]:
        """Numerical Hessian of the log-likelihood in (c, phi, a0, a1, b1)."""
        x = np.array([getattr(params, name) for name in PARAM_NAMES])

        def f(point: np.ndarray) -> float:
            try:
                candidate = GarchParams(*point, df=params.df, innovation=params.innovation)
            except DataError:
                return math.nan
            return _loglik_value(candidate, r)

        if not math.isfinite(f(x)):
            return None
        with np.errstate(all="ignore"):
            hess = approx_hess(x, f, epsilon=1e-4 * np.maximum(np.abs(x), 1e-2))
        if not np.all(np.isfinite(hess)):
            return None
        return hess

    def _standard_errors(self, params: GarchParams, r: np.ndarray) -> Dict[str, float]:
        nan = {name: math.nan for name in PARAM_NAMES}
        hess = self._hessian(params, r)
        if hess is None:
            logger.warning("Numerical Hessian hits the parameter boundary; standard errors unavailable")
            return nan
        try:
            cov = np.linalg.inv(-hess)
        except np.linalg.LinAlgError:
            logger.warning("Numerical Hessian is singular; standard errors unavailable")
            return nan
        variances = np.diag(cov)
        if np.any(variances <= 0):
            logger.warning("Numerical Hessian is not negative definite; standard errors unavailable")
            return nan
        return {name: float(math.sqrt(v)) for name, v in zip(PARAM_NAMES, variances)}

    def garch_fit(self, series: ReturnSeries) -> GarchFit:
        """
        Maximum likelihood fit over the constrained parameter space.

        Constraints are removed by reparameterisation (tanh for phi, log for a0,
        logistic persistence and ARCH share for a1, b1). Every configured start
        is optimised; the highest likelihood wins, ties going to the earlier
        start.

        Args:
            series: The return series

        Returns:
            The fitted model with filtered paths and one-step forecasts
        """
        series.require(GARCH_MIN_OBS, "GARCH fitting")
        r = series.values
        if not np.var(r) > 0:
            raise DataError("Cannot fit a GARCH model to a constant series")

        best = None
        best_index = -1
        for index, theta0 in enumerate(self._starting_points(r)):
            try:
                result = self._optimize_start(theta0, r)
            except EstimationError as e:
                logger.warning(f"Start {index} failed: {str(e)}")
                continue
            if best is None or result.fun < best.fun:
                best, best_index = result, index

        if best is None:
            raise EstimationError("GARCH optimisation failed from every starting point")

        params = self._to_params(best.x)
        loglik = _loglik_value(params, r)
        if not math.isfinite(loglik):
            raise EstimationError("GARCH likelihood is not finite at the optimum")
        sigma, z = self.garch_filter(params, series)
        mu_next, sigma_next = self.forecast(params, series)

        stationary = params.persistence < 1.0 - self.boundary_tol
        if not stationary:
            logger.warning(f"Fit is on the stationarity boundary: a1 + b1 = {params.persistence:.8f}")

        check = self.stationarity_check(params)
        residuals = ReturnSeries(z)
        diagnostics = {
            "ljung_box_z": [
                result.to_dict() for result in self.series_service.ljung_box_pair(residuals, LJUNG_BOX_LAGS)
            ],
            "start_index": best_index,
        }

        logger.info(
            f"GARCH fit: c={params.c:.4f} phi={params.phi:.4f} a0={params.a0:.4g} "
            f"a1={params.a1:.4f} b1={params.b1:.4f} loglik={loglik:.3f}"
        )
        return GarchFit(
            params=params,
            param_se=self._standard_errors(params, r),
            loglik=loglik,
            sigma=sigma,
            z=z,
            mu_next=mu_next,
            sigma_next=sigma_next,
            n=series.n,
            stationary=stationary,
            eq12_integral=check.eq12_integral,
            diagnostics=diagnostics,
        )
