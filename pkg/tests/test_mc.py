"""
Tests for the GARCH-t scaling simulation.
"""

import math

import numpy as np
import pytest
from scipy import stats

from tailvar.models.domain import McConfig
from tailvar.models.schemas import MC_REPORT_SCHEMA, missing_fields
from tailvar.services.mc_service import McService, block_sums, matches_reference
from tailvar.utils.errors import DataError, EstimationError
from tailvar.utils.random_streams import open_uniforms, replication_stream, std_t_draws
from tests.conftest import garch_config

SMALL = dict(n=1000, reps=6, horizons=(1, 2, 5), seed=99, burn_in=200)


# ---- Random streams ----

def test_streams_are_reproducible_per_replication():
    a = replication_stream(42, 3).random(5)
    b = replication_stream(42, 3).random(5)
    c = replication_stream(42, 4).random(5)

    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_open_uniforms_avoid_the_endpoints():
    u = open_uniforms(replication_stream(1, 0), 100_000)

    assert u.min() > 0.0 and u.max() < 1.0


def test_std_t_draws_follow_the_scaled_t_distribution():
    draws = std_t_draws(replication_stream(5, 0), 20_000, 4.0)

    assert stats.kstest(draws / math.sqrt(0.5), "t", args=(4,)).pvalue > 0.001


# ---- Simulation ----

def test_simulation_is_deterministic(mc_service):
    config = garch_config(n=500)
    first = mc_service.simulate_garch_t(config, 2)
    second = mc_service.simulate_garch_t(config, 2)
    other = mc_service.simulate_garch_t(config, 3)

    np.testing.assert_array_equal(first.values, second.values)
    assert not np.array_equal(first.values, other.values)
    assert first.n == 500


def test_constant_volatility_without_garch_terms(mc_service):
    config = garch_config(a0=0.25, a1=0.0, b1=0.0, n=400, burn_in=100)
    path = mc_service.simulate_garch_t(config, 0)
    z = std_t_draws(replication_stream(config.seed, 0), 500, 4.0)[100:]

    np.testing.assert_allclose(path.values, 0.5 * z, rtol=1e-12)


def test_simulated_paths_show_volatility_clustering(mc_service, series_service):
    path = mc_service.simulate_garch_t(garch_config(n=5000, seed=12), 0)

    assert series_service.ljung_box(path, squared=True).p_value < 0.01


def test_config_validation():
    with pytest.raises(DataError):
        McConfig(a0=0.1, a1=0.5, b1=0.5, n=1000, reps=1, horizons=(1,), seed=1)
    with pytest.raises(DataError):
        McConfig(a0=0.1, a1=0.1, b1=0.8, n=50, reps=1, horizons=(1,), seed=1)
    with pytest.raises(DataError):
        McConfig(a0=0.1, a1=0.1, b1=0.8, n=500, reps=0, horizons=(1,), seed=1)


def test_block_sums_are_non_overlapping():
    np.testing.assert_array_equal(block_sums(np.arange(7.0), 3), [3.0, 12.0])
    np.testing.assert_array_equal(block_sums(np.arange(4.0), 1), np.arange(4.0))


def test_simulated_variance_matches_the_unconditional_variance(mc_service):
    config = garch_config(a0=0.2, a1=0.05, b1=0.85, n=5000, burn_in=500)
    pooled = np.concatenate([mc_service.simulate_garch_t(config, i).values for i in range(20)])

    assert float(np.mean(pooled ** 2)) == pytest.approx(0.2 / (1 - 0.05 - 0.85), rel=0.1)


# ---- Reports ----

def test_report_structure(mc_service):
    report = mc_service.run_mc(garch_config(**SMALL))

    assert report.completed + report.failures == 6
    assert len(report.rows) == 2 * 3
    assert [(row.p, row.horizon) for row in report.rows][:3] == [(0.05, 1), (0.05, 2), (0.05, 5)]
    assert list(report.to_frame().columns) == ["p", "horizon", "mean_pred", "sd_pred", "empirical", "paper_ref"]
    assert all(row.paper_ref is None for row in report.rows)
    assert missing_fields(report.to_dict(), MC_REPORT_SCHEMA) == []


def test_predictions_follow_each_replications_alpha(mc_service):
    report = mc_service.run_mc(garch_config(**SMALL))

    for p in (0.05, 0.01):
        single = report.predictions[(p, 1)]
        for h in (2, 5):
            expected = single * h ** (1.0 / report.alphas)
            np.testing.assert_allclose(report.predictions[(p, h)], expected, rtol=1e-10)


def test_theoretical_column_scales_the_single_period_quantile(mc_service):
    report = mc_service.run_mc(garch_config(**SMALL))

    for p in (0.05, 0.01):
        base = report.row(p, 1).empirical
        for h in (1, 2, 5):
            assert report.row(p, h).theoretical == pytest.approx(base * h ** 0.25)


def test_reports_are_reproducible_across_worker_counts(tail_service, var_service):
    config = garch_config(**SMALL)
    serial = McService(workers=1, tail_service=tail_service, var_service=var_service).run_mc(config)
    parallel = McService(workers=3, tail_service=tail_service, var_service=var_service).run_mc(config)

    assert serial.to_dict() == parallel.to_dict()


def test_single_replication_reduces_to_one_pipeline_run(mc_service, tail_service, var_service):
    config = garch_config(n=1000, reps=1, horizons=(1,), seed=5)
    report = mc_service.run_mc(config)

    path = mc_service.simulate_garch_t(config, 0)
    est = var_service.ensure_extrapolation(tail_service.huisman_estimate(path), path, 0.05)
    direct = var_service.evt_var_unconditional(est, path.n, 0.01).var_pct
    assert report.row(0.01, 1).mean_pred == pytest.approx(direct, rel=1e-12)
    assert report.row(0.01, 1).sd_pred == 0.0


def test_failed_replications_are_excluded(mc_service, tail_service, monkeypatch):
    original = tail_service.huisman_estimate
    calls = []

    def flaky(series, *args, **kwargs):
        calls.append(1)
        if len(calls) == 1:
            raise EstimationError("forced failure")
        return original(series, *args, **kwargs)

    monkeypatch.setattr(tail_service, "huisman_estimate", flaky)
    report = mc_service.run_mc(garch_config(n=500, reps=20, horizons=(1,), seed=3))

    assert report.failures == 1
    assert report.completed == 19
    assert report.predictions[(0.05, 1)].size == 19


def test_too_many_failures_abort(mc_service, tail_service, monkeypatch):
    def broken(series, *args, **kwargs):
        raise EstimationError("forced failure")

    monkeypatch.setattr(tail_service, "huisman_estimate", broken)
    with pytest.raises(EstimationError, match="replications failed"):
        mc_service.run_mc(garch_config(n=500, reps=5, horizons=(1,), seed=3))


def test_reference_values_attach_only_to_the_published_configuration():
    assert matches_reference(McConfig(a0=0.1, a1=0.15, b1=0.8, n=2000, reps=200, horizons=(1,), seed=1))
    assert not matches_reference(McConfig(a0=0.1, a1=0.15, b1=0.8, n=2000, reps=50, horizons=(1,), seed=1))


@pytest.mark.slow
def test_published_configuration(mc_service):
    config = McConfig(a0=0.1, a1=0.15, b1=0.8, n=2000, reps=200, horizons=(1, 2, 4, 5), seed=42)
    report = mc_service.run_mc(config)
    paths = [mc_service.simulate_garch_t(config, i).values for i in range(config.reps)]

    assert report.failures <= 20
    assert report.row(0.05, 5).paper_ref == pytest.approx(13.0764)
    for p in (0.05, 0.01):
        single = report.row(p, 1)
        oracle_single = -np.quantile(np.concatenate(paths), p)
        for h in (4, 5):
            row = report.row(p, h)
            oracle = -np.quantile(np.concatenate([block_sums(v, h) for v in paths]), p)
            assert row.empirical == pytest.approx(oracle, rel=1e-12)
            assert row.theoretical == pytest.approx(oracle_single * h ** 0.25, rel=1e-12)
            # estimated alphas sit below 4, so the predicted growth beats h^(1/4)
            assert row.mean_pred / single.mean_pred > h ** 0.25
    # clustered volatility makes aggregated losses grow faster than any alpha-root rule
    for h in (4, 5):
        assert report.row(0.01, h).mean_pred < report.row(0.01, h).empirical
    assert report.row(0.05, 1).mean_pred == pytest.approx(report.row(0.05, 1).empirical, rel=0.15)
    assert report.row(0.01, 1).rel_error >= report.row(0.05, 1).rel_error
