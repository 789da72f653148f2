"""
Reproducible random streams.

Each Monte Carlo replication draws from its own counter-based Philox stream,
keyed by (seed, replication index), so serial and parallel runs see exactly
the same numbers regardless of scheduling order.
"""

import math

import numpy as np
from scipy import stats

__all__ = ["replication_stream", "open_uniforms", "std_t_draws"]

_MANTISSA = 2 ** 53


def replication_stream(seed: int, rep_index: int) -> np.random.Generator:
    """Return the generator for replication `rep_index` of a run seeded with `seed`."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(rep_index),))
    return np.random.Generator(np.random.Philox(sequence))


def open_uniforms(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    return (rng.integers(0, _MANTISSA, size=size, dtype=np.int64) + 0.5) / _MANTISSA


def std_t_draws(rng: np.random.Generator, size: int, df: float) -> np.ndarray:
    """Unit-variance Student-t draws by inversion of the CDF."""
    return stats.t.ppf(open_uniforms(rng, size), df) * math.sqrt((df - 2.0) / df)
