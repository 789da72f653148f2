"""
Shared fixtures for the tailvar test suite.
"""

import numpy as np
import pytest

from tailvar.models.domain import McConfig, ReturnSeries
from tailvar.services.garch_service import GarchService
from tailvar.services.mc_service import McService
from tailvar.services.series_service import SeriesService
from tailvar.services.tail_service import TailService
from tailvar.services.var_service import VarService


def pareto_losses(alpha: float, n: int, seed: int) -> ReturnSeries:
    """Exact Pareto(alpha) losses on [1, inf), stored as negative returns."""
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(n)
    return ReturnSeries(-(u ** (-1.0 / alpha)))


def pareto_mixture_losses(alpha: float, n: int, seed: int) -> ReturnSeries:
    """Even mixture of Pareto(alpha) and Pareto(2 alpha) losses; tail index alpha with a second-order term."""
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(n)
    index = np.where(rng.random(n) < 0.5, alpha, 2.0 * alpha)
    return ReturnSeries(-(u ** (-1.0 / index)))


def garch_config(**overrides) -> McConfig:
    settings = {"a0": 0.1, "a1": 0.15, "b1": 0.8, "n": 2000, "reps": 1, "horizons": (1,), "seed": 7}
    settings.update(overrides)
    return McConfig(**settings)


@pytest.fixture
def series_service():
    return SeriesService()


@pytest.fixture
def tail_service():
    return TailService()


@pytest.fixture
def garch_service():
    return GarchService()


@pytest.fixture
def var_service(tail_service):
    return VarService(tail_service)


@pytest.fixture
def mc_service(tail_service, var_service):
    return McService(workers=1, tail_service=tail_service, var_service=var_service)


@pytest.fixture
def pareto():
    return pareto_losses


@pytest.fixture
def garch_path(mc_service):
    """Factory for simulated GARCH(1,1)-t(4) paths."""

    def make(seed: int = 7, rep_index: int = 0, **overrides) -> ReturnSeries:
        return mc_service.simulate_garch_t(garch_config(seed=seed, **overrides), rep_index)

    return make


@pytest.fixture
def write_csv(tmp_path):
    """Write a CSV file under tmp_path and return its path."""

    def make(text: str, name: str = "input.csv") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return make
