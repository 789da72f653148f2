"""
Tests for series loading and diagnostics.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from tailvar.models.domain import ReturnSeries
from tailvar.models.schemas import DIAGNOSTICS_SCHEMA, missing_fields
from tailvar.services.series_service import SeriesService
from tailvar.utils.errors import DataError


# ---- Loading ----

def test_price_mode_converts_to_percent_log_returns(series_service, write_csv):
    path = write_csv("date,price\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n")
    series = series_service.load_series(path, "price")

    assert series.n == 2
    assert series.values[0] == pytest.approx(100 * math.log(1.1), abs=1e-12)
    assert series.values[1] == pytest.approx(100 * math.log(0.9), abs=1e-12)
    assert series.labels == ("2020-01-02", "2020-01-03")


def test_return_mode_passes_values_through(series_service, write_csv):
    path = write_csv("Return\n0.5\n-1.25\n2\n")
    series = series_service.load_series(path, "return")

    np.testing.assert_array_equal(series.values, [0.5, -1.25, 2.0])
    assert series.labels is None


def test_missing_file_is_a_data_error(series_service, tmp_path):
    with pytest.raises(DataError, match="not found"):
        series_service.load_series(str(tmp_path / "nope.csv"))


def test_malformed_row_reports_its_line(series_service, write_csv):
    path = write_csv("price\n100\nabc\n102\n")
    with pytest.raises(DataError, match="line 3"):
        series_service.load_series(path)


def test_missing_column_is_a_data_error(series_service, write_csv):
    path = write_csv("close\n100\n101\n")
    with pytest.raises(DataError, match="price"):
        series_service.load_series(path)


def test_single_row_is_rejected(series_service, write_csv):
    with pytest.raises(DataError):
        series_service.load_series(write_csv("price\n100\n"))


def test_non_positive_price_is_rejected(series_service, write_csv):
    with pytest.raises(DataError, match="Non-positive"):
        series_service.load_series(write_csv("price\n100\n0\n101\n"))


def test_labels_must_increase(series_service, write_csv):
    path = write_csv("date,return\n2020-01-02,1.0\n2020-01-01,2.0\n")
    with pytest.raises(DataError, match="increasing"):
        series_service.load_series(path, "return")


# ---- Summary statistics ----

def test_summary_stats_on_a_small_sample(series_service):
    summary = series_service.summary_stats(ReturnSeries([1.0, 2.0, 3.0, 4.0, 5.0]))

    assert summary.mean == pytest.approx(3.0)
    assert summary.sd == pytest.approx(math.sqrt(2.5))
    assert summary.skewness == pytest.approx(0.0, abs=1e-12)
    # biased moment estimator: m4 / m2^2 - 3 = 6.8 / 4 - 3
    assert summary.excess_kurtosis == pytest.approx(-1.3)
    assert summary.min == 1.0 and summary.max == 5.0


def test_normal_sample_has_near_zero_excess_kurtosis(series_service):
    rng = np.random.default_rng(11)
    summary = series_service.summary_stats(ReturnSeries(rng.standard_normal(10_000)))

    assert abs(summary.excess_kurtosis) < 0.2
    assert summary.ks_stat < 0.03


def test_student_t_sample_is_heavy_tailed(series_service):
    rng = np.random.default_rng(12)
    summary = series_service.summary_stats(ReturnSeries(rng.standard_t(4, 10_000)))

    assert summary.excess_kurtosis > 1.0


def test_summary_stats_need_four_observations(series_service):
    with pytest.raises(DataError):
        series_service.summary_stats(ReturnSeries([1.0, 2.0, 3.0]))


def test_zero_variance_is_rejected(series_service):
    with pytest.raises(DataError, match="zero variance"):
        series_service.summary_stats(ReturnSeries(np.ones(10)))


# ---- Ljung-Box ----

def test_ljung_box_matches_the_portmanteau_formula(series_service):
    rng = np.random.default_rng(3)
    x = rng.standard_normal(300)
    result = series_service.ljung_box(ReturnSeries(x), lags=5)

    c = x - x.mean()
    n = x.size
    rho = [np.dot(c[k:], c[:-k]) / np.dot(c, c) for k in range(1, 6)]
    q = n * (n + 2) * sum(r ** 2 / (n - k) for k, r in enumerate(rho, start=1))
    assert result.statistic == pytest.approx(q, rel=1e-9)
    assert result.p_value == pytest.approx(stats.chi2.sf(q, 5), rel=1e-8)


def test_ljung_box_detects_autocorrelation(series_service):
    rng = np.random.default_rng(4)
    shocks = rng.standard_normal(1000)
    x = np.empty_like(shocks)
    x[0] = shocks[0]
    for t in range(1, x.size):
        x[t] = 0.5 * x[t - 1] + shocks[t]

    assert series_service.ljung_box(ReturnSeries(x)).p_value < 1e-6


def test_ljung_box_on_squares(series_service):
    x = np.array([1.0, -2.0, 3.0, -1.0, 2.0, -3.0, 1.5, -0.5])
    squared = series_service.ljung_box(ReturnSeries(x), lags=2, squared=True)
    direct = series_service.ljung_box(ReturnSeries(x ** 2), lags=2)

    assert squared.squared
    assert squared.statistic == pytest.approx(direct.statistic)


def test_ljung_box_needs_more_observations_than_lags(series_service):
    with pytest.raises(DataError):
        series_service.ljung_box(ReturnSeries(np.arange(12.0)), lags=12)


def test_ljung_box_rejects_constant_series(series_service):
    with pytest.raises(DataError, match="constant"):
        series_service.ljung_box(ReturnSeries(np.full(50, 2.0)))


def test_diagnostics_document_is_complete(series_service):
    rng = np.random.default_rng(5)
    document = series_service.diagnostics(ReturnSeries(rng.standard_normal(200)))

    assert missing_fields(document, DIAGNOSTICS_SCHEMA) == []
    assert [entry["squared"] for entry in document["ljung_box"]] == [False, True]
    assert all(entry["lags"] == 12 for entry in document["ljung_box"])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=20, max_size=80), st.floats(0.1, 10))
def test_ljung_box_is_scale_invariant(values, factor):
    series_service = SeriesService()
    x = np.asarray(values)
    if np.ptp(x) < 1e-3:
        return
    base = series_service.ljung_box(ReturnSeries(x), lags=3)
    scaled = series_service.ljung_box(ReturnSeries(x * factor), lags=3)

    assert scaled.statistic == pytest.approx(base.statistic, rel=1e-8, abs=1e-10)


def test_ljung_box_rejects_iid_noise_at_its_nominal_rate(series_service):
    rejections = 0
    for seed in range(200):
        x = np.random.default_rng(seed).standard_normal(500)
        rejections += series_service.ljung_box(ReturnSeries(x)).p_value < 0.05

    assert 2 <= rejections <= 20


@pytest.mark.parametrize("scale, shift", [(2.5, 1.0), (0.01, -3.0), (40.0, 0.0)])
def test_ks_statistic_is_affine_invariant(series_service, scale, shift):
    x = np.random.default_rng(21).standard_t(5, 400)
    base = series_service.summary_stats(ReturnSeries(x))
    moved = series_service.summary_stats(ReturnSeries(scale * x + shift))

    assert moved.ks_stat == pytest.approx(base.ks_stat, abs=1e-10)
    assert moved.skewness == pytest.approx(base.skewness, abs=1e-10)
