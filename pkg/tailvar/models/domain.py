"""
Domain types for tailvar.

Every type is a frozen dataclass that validates its invariants on construction,
so a value that exists is a value that can be used.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from tailvar.utils.errors import DataError, EstimationError

TAILS = ("lower", "upper")
TAIL_METHODS = ("fixed", "phillips", "huisman")
VAR_METHODS = ("evt_unconditional", "evt_conditional", "gaussian_conditional")
INNOVATIONS = ("t", "normal")


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """
    Ordered percent log-returns with optional date labels.

    Labels, when present, must be strictly increasing as strings (ISO-8601 dates
    sort lexicographically).
    """

    values: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size == 0:
            raise DataError("A return series needs at least one value")
        if not np.all(np.isfinite(values)):
            raise DataError("Return series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != values.size:
                raise DataError(f"Got {len(labels)} labels for {values.size} values")
            for previous, current in zip(labels, labels[1:]):
                if not previous < current:
                    raise DataError(f"Labels are not strictly increasing at {previous} -> {current}")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> int:
        return len(self)

    def require(self, minimum: int, purpose: str) -> None:
        """Raise DataError unless the series has at least `minimum` observations."""
        if self.n < minimum:
            raise DataError(f"{purpose} needs at least {minimum} observations, got {self.n}")

    def scaled(self, factor: float) -> "ReturnSeries":
        return ReturnSeries(self.values * factor, self.labels)

    def negated(self) -> "ReturnSeries":
        return ReturnSeries(-self.values, self.labels)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"return": self.values})
        if self.labels is not None:
            frame.insert(0, "date", list(self.labels))
        return frame


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float
    min: float
    max: float
    skewness: float
    excess_kurtosis: float
    ks_stat: float

    def __post_init__(self):
        if self.sd < 0:
            raise DataError("Standard deviation cannot be negative")
        if not 0.0 <= self.ks_stat <= 1.0:
            raise DataError(f"KS statistic {self.ks_stat} outside [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.min,
            "max": self.max,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_stat": self.ks_stat,
        }


@dataclass(frozen=True)
class LjungBoxResult:
    lags: int
    statistic: float
    p_value: float
    squared: bool = False

    def __post_init__(self):
        if self.lags < 1:
            raise DataError("Ljung-Box needs at least one lag")
        if self.statistic < 0:
            raise DataError("Ljung-Box statistic cannot be negative")
        if not 0.0 <= self.p_value <= 1.0:
            raise DataError(f"p-value {self.p_value} outside [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lags": self.lags,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "squared": self.squared,
        }


@dataclass(frozen=True)
class TailEstimate:
    """
    Semi-parametric tail estimate.

    `gamma` is the tail exponent 1/alpha. A gamma of exactly zero is legal and
    flags a degenerate window (all tail values equal); VaR and moment tests
    reject it.
    """

    gamma: float
    m: int
    threshold: float
    se_gamma: float
    implied_scale: float
    tail: str
    method: str
    n: int

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise EstimationError(f"Invalid tail exponent {self.gamma}")
        if not math.isfinite(self.se_gamma) or self.se_gamma < 0:
            raise EstimationError(f"Invalid standard error {self.se_gamma}")
        if self.m < 2:
            raise EstimationError(f"Threshold count must be at least 2, got {self.m}")
        if self.tail not in TAILS:
            raise EstimationError(f"Unknown tail {self.tail!r}")
        if self.method not in TAIL_METHODS:
            raise EstimationError(f"Unknown tail method {self.method!r}")
        if self.tail == "lower" and not self.threshold < 0:
            raise EstimationError("Lower-tail threshold must be negative")
        if self.tail == "upper" and not self.threshold > 0:
            raise EstimationError("Upper-tail threshold must be positive")

    @property
    def alpha(self) -> float:
        return 1.0 / self.gamma if self.gamma > 0 else math.inf

    @property
    def se_alpha(self) -> float:
        # delta method
        return self.alpha ** 2 * self.se_gamma

    def require_positive(self) -> None:
        if not self.gamma > 0:
            raise EstimationError("Tail estimate is degenerate (gamma = 0)")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tail": self.tail,
            "method": self.method,
            "n": self.n,
            "m": self.m,
            "threshold": self.threshold,
            "gamma": self.gamma,
            "se_gamma": self.se_gamma,
            "alpha": self.alpha,
            "se_alpha": self.se_alpha,
            "implied_scale": self.implied_scale,
        }


@dataclass(frozen=True, eq=False)
class HillTrace:
    """Hill estimates over a grid of threshold counts m = 2 ... eta."""

    m: np.ndarray
    gamma: np.ndarray
    se: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=int)
        if m.size == 0:
            raise EstimationError("Empty Hill trace")
        if np.any(np.diff(m) <= 0):
            raise EstimationError("Hill trace threshold counts must be strictly increasing")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=float))
        object.__setattr__(self, "se", np.asarray(self.se, dtype=float))

    @property
    def entries(self) -> List[Tuple[int, float, float]]:
        return [(int(k), float(g), float(s)) for k, g, s in zip(self.m, self.gamma, self.se)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"m": self.m, "gamma": self.gamma, "se": self.se})


@dataclass(frozen=True)
class GarchParams:
    """
    AR(1)-GARCH(1,1) parameters.

    Stationarity (a1 + b1 < 1) is not enforced here so that boundary fits and
    explosive configurations can still be described and checked.
    """

    c: float
    phi: float
    a0: float
    a1: float
    b1: float
    df: float = 4.0
    innovation: str = "t"

    def __post_init__(self):
        if not self.a0 > 0:
            raise DataError(f"a0 must be positive, got {self.a0}")
        if self.a1 < 0 or self.b1 < 0:
            raise DataError(f"ARCH/GARCH coefficients must be nonnegative, got a1={self.a1}, b1={self.b1}")
        if not abs(self.phi) < 1:
            raise DataError(f"|phi| must be below 1, got {self.phi}")
        if self.innovation not in INNOVATIONS:
            raise DataError(f"Unknown innovation {self.innovation!r}")
        if self.innovation == "t" and not self.df > 2:
            raise DataError("Standardized t innovations need df > 2")

    @property
    def persistence(self) -> float:
        return self.a1 + self.b1

    @property
    def is_stationary(self) -> bool:
        return self.persistence < 1

    @property
    def unconditional_variance(self) -> float:
        if not self.is_stationary:
            return math.inf
        return self.a0 / (1.0 - self.persistence)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c": self.c,
            "phi": self.phi,
            "a0": self.a0,
            "a1": self.a1,
            "b1": self.b1,
            "df": self.df,
            "innovation": self.innovation,
        }


@dataclass(frozen=True, eq=False)
class GarchFit:
    params: GarchParams
    param_se: Dict[str, float]
    loglik: float
    sigma: np.ndarray
    z: np.ndarray
    mu_next: float
    sigma_next: float
    n: int
    stationary: bool = True
    eq12_integral: float = float("nan")
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if sigma.shape != z.shape or sigma.size != self.n:
            raise EstimationError("Sigma and residual paths must both have length n")
        if not np.all(sigma > 0):
            raise EstimationError("Conditional standard deviations must be positive")
        if not self.sigma_next > 0:
            raise EstimationError("Forecast sigma must be positive")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "z", z)

    @property
    def residuals(self) -> ReturnSeries:
        return ReturnSeries(self.z)

    def to_dict(self) -> Dict[str, Any]:
        document = dict(self.params.to_dict())
        document.update({
            "loglik": self.loglik,
            "mu_next": self.mu_next,
            "sigma_next": self.sigma_next,
            "n": self.n,
            "eq12_integral": self.eq12_integral,
            "stationary": self.stationary,
            "param_se": dict(self.param_se),
            "diagnostics": self.diagnostics,
            "sigma": self.sigma.tolist(),
            "z": self.z.tolist(),
        })
        return document

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "GarchFit":
        params = GarchParams(
            c=float(document["c"]),
            phi=float(document["phi"]),
            a0=float(document["a0"]),
            a1=float(document["a1"]),
            b1=float(document["b1"]),
            df=float(document["df"]),
            innovation=document.get("innovation", "t"),
        )
        return cls(
            params=params,
            param_se={k: float(v) for k, v in document.get("param_se", {}).items()},
            loglik=float(document["loglik"]),
            sigma=np.asarray(document["sigma"], dtype=float),
            z=np.asarray(document["z"], dtype=float),
            mu_next=float(document["mu_next"]),
            sigma_next=float(document["sigma_next"]),
            n=int(document["n"]),
            stationary=bool(document.get("stationary", True)),
            eq12_integral=float(document.get("eq12_integral", float("nan"))),
            diagnostics=document.get("diagnostics", {}),
        )

    def path_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": np.arange(1, self.n + 1), "sigma": self.sigma, "z": self.z})


@dataclass(frozen=True)
class StationarityCheck:
    sum_ok: bool
    eq12_integral: float
    eq12_ok: bool
    degenerate: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sum_ok": self.sum_ok,
            "eq12_integral": self.eq12_integral,
            "eq12_ok": self.eq12_ok,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class VarEstimate:
    p: float
    horizon_n: int
    var_pct: float
    method: str
    scale_q: float = 1.0
    alpha_used: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise DataError(f"Tail probability must lie in (0, 1), got {self.p}")
        if self.horizon_n < 1:
            raise DataError(f"Horizon must be at least 1, got {self.horizon_n}")
        if not self.var_pct >= 0:
            raise EstimationError(f"VaR must be a nonnegative loss, got {self.var_pct}")
        if self.scale_q < 1:
            raise EstimationError(f"Scaling multiplier must be at least 1, got {self.scale_q}")
        if self.method not in VAR_METHODS:
            raise DataError(f"Unknown VaR method {self.method!r}")

    @property
    def confidence(self) -> float:
        return 1.0 - self.p

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "p": self.p,
            "horizon": self.horizon_n,
            "var_pct": self.var_pct,
            "scale_q": self.scale_q,
            "alpha_used": self.alpha_used,
        }


@dataclass(frozen=True)
class McConfig:
    a0: float
    a1: float
    b1: float
    n: int
    reps: int
    horizons: Tuple[int, ...]
    seed: int
    burn_in: int = 1000
    df: float = 4.0
    probabilities: Tuple[float, ...] = (0.05, 0.01)

    def __post_init__(self):
        if not self.a0 > 0 or self.a1 < 0 or self.b1 < 0:
            raise DataError("GARCH parameters need a0 > 0 and a1, b1 >= 0")
        if not self.a1 + self.b1 < 1:
            raise DataError(f"a1 + b1 must be below 1, got {self.a1 + self.b1}")
        if self.n < 100:
            raise DataError(f"Path length must be at least 100, got {self.n}")
        if self.reps < 1:
            raise DataError("At least one replication is required")
        if self.burn_in < 0:
            raise DataError("burn_in cannot be negative")
        if not self.horizons or min(self.horizons) < 1:
            raise DataError("Horizons must be positive integers")
        if not self.probabilities or not all(0 < p < 0.5 for p in self.probabilities):
            raise DataError("Probabilities must lie in (0, 0.5)")
        object.__setattr__(self, "horizons", tuple(sorted(set(int(h) for h in self.horizons))))
        object.__setattr__(self, "probabilities", tuple(sorted(set(float(p) for p in self.probabilities), reverse=True)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a0": self.a0,
            "a1": self.a1,
            "b1": self.b1,
            "n": self.n,
            "reps": self.reps,
            "horizons": list(self.horizons),
            "seed": self.seed,
            "burn_in": self.burn_in,
            "df": self.df,
            "probabilities": list(self.probabilities),
        }


@dataclass(frozen=True)
class McRow:
    p: float
    horizon: int
    mean_pred: float
    sd_pred: float
    empirical: float
    theoretical: float
    rel_error: float
    paper_ref: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "horizon": self.horizon,
            "mean_pred": self.mean_pred,
            "sd_pred": self.sd_pred,
            "empirical": self.empirical,
            "theoretical": self.theoretical,
            "rel_error": self.rel_error,
            "paper_ref": self.paper_ref,
        }


@dataclass(frozen=True, eq=False)
class McReport:
    config: McConfig
    rows: Tuple[McRow, ...]
    completed: int
    failures: int
    predictions: Dict[Tuple[float, int], np.ndarray]
    alphas: np.ndarray

    def __post_init__(self):
        if self.completed + self.failures != self.config.reps:
            raise EstimationError("Replication counts do not add up to the configured reps")

    def row(self, p: float, horizon: int) -> McRow:
        for candidate in self.rows:
            if math.isclose(candidate.p, p) and candidate.horizon == horizon:
                return candidate
        raise KeyError((p, horizon))

    def to_frame(self) -> pd.DataFrame:
        columns = ["p", "horizon", "mean_pred", "sd_pred", "empirical", "paper_ref"]
        return pd.DataFrame([r.to_dict() for r in self.rows])[columns]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "completed": self.completed,
            "failures": self.failures,
            "alpha_mean": float(np.mean(self.alphas)) if self.alphas.size else None,
            "rows": [r.to_dict() for r in self.rows],
        }
