"""
Series Service for tailvar

This module ingests price/return files and computes the distributional and
serial-dependence diagnostics of a return series: moments, Kolmogorov-Smirnov
distance to the fitted normal, and Ljung-Box portmanteau statistics.
"""

import os
import logging
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy import stats
from statsmodels.stats.diagnostic import acorr_ljungbox

from tailvar.config.settings import LJUNG_BOX_LAGS, MIN_SUMMARY_OBS
from tailvar.models.domain import LjungBoxResult, ReturnSeries, SummaryStats
from tailvar.utils.errors import DataError

# Configure logging
logger = logging.getLogger(__name__)

COLUMNS = ("price", "return")


class SeriesService:
    """
    Loads return series and computes their diagnostics.
    """

    def __init__(self, lags: int = LJUNG_BOX_LAGS):
        """
        Initialize the Series Service.

        Args:
            lags: Default number of Ljung-Box lags
        """
        self.lags = lags
        logger.info(f"Series Service initialized with {lags} Ljung-Box lags")

    def load_series(self, path: str, column: str = "price") -> ReturnSeries:
        """
        Load a return series from a CSV file with a header row.

        In price mode the file's `price` column is turned into percent log
        returns 100 * (ln P_t - ln P_{t-1}); in return mode the `return` column
        is passed through unchanged. An optional `date` column becomes labels.

        Args:
            path: Path to the CSV file
            column: "price" or "return"

        Returns:
            The loaded series
        """
        if column not in COLUMNS:
            raise DataError(f"Column mode must be one of {COLUMNS}, got {column!r}")
        if not os.path.exists(path):
            raise DataError(f"Input file not found: {path}")

        try:
            frame = pd.read_csv(path, dtype=str, skipinitialspace=True, encoding="utf-8")
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise DataError(f"Could not parse {path}: {str(e)}") from e

        frame.columns = [str(name).strip().lower() for name in frame.columns]
        if column not in frame.columns:
            raise DataError(f"Column {column!r} not found in {path} (have {list(frame.columns)})")

        frame = frame.dropna(how="all")
        raw = frame[column]
        values = pd.to_numeric(raw, errors="coerce")
        bad = values.isna() | ~np.isfinite(values.fillna(0.0))
        if bad.any():
            row = int(bad.idxmax())
            # header is line 1
            raise DataError(f"Malformed value {raw.loc[row]!r} in {path} at line {row + 2}")

        if len(values) < 2:
            raise DataError(f"{path} has {len(values)} usable rows, need at least 2")

        labels = None
        if "date" in frame.columns:
            labels = [str(d).strip() for d in frame["date"]]

        numbers = values.to_numpy(dtype=float)
        if column == "price":
            if np.any(numbers <= 0):
                row = int(np.argmax(numbers <= 0))
                raise DataError(f"Non-positive price {numbers[row]} in {path} at line {row + 2}")
            returns = 100.0 * np.diff(np.log(numbers))
            labels = labels[1:] if labels is not None else None
        else:
            returns = numbers

        series = ReturnSeries(returns, tuple(labels) if labels is not None else None)
        logger.info(f"Loaded {series.n} returns from {path} ({column} mode)")
        return series

    def summary_stats(self, series: ReturnSeries) -> SummaryStats:
        """
        Compute moment and normality diagnostics.

        Skewness and kurtosis are the moment (biased) estimators; kurtosis is
        reported as excess kurtosis. The KS statistic is the sup distance
        between the empirical CDF and the normal with the sample mean and sd.

        Args:
            series: The return series

        Returns:
            The summary statistics
        """
        series.require(MIN_SUMMARY_OBS, "Summary statistics")
        x = series.values
        mean = float(np.mean(x))
        sd = float(np.std(x, ddof=1))
        if not sd > 0:
            raise DataError("Series has zero variance; skewness and kurtosis are undefined")

        ks_stat = float(stats.kstest(x, "norm", args=(mean, sd)).statistic)
        return SummaryStats(
            n=series.n,
            mean=mean,
            sd=sd,
            min=float(np.min(x)),
            max=float(np.max(x)),
            skewness=float(stats.skew(x, bias=True)),
            excess_kurtosis=float(stats.kurtosis(x, fisher=True, bias=True)),
            ks_stat=ks_stat,
        )

    def ljung_box(self, series: ReturnSeries, lags: Optional[int] = None, squared: bool = False) -> LjungBoxResult:
        """
        Ljung-Box portmanteau test on the (optionally squared) demeaned series.

        Q = n(n+2) * sum_{j=1..k} rho_j^2 / (n - j), compared with a chi-square
        on k degrees of freedom.

        Args:
            series: The return series
            lags: Number of lags k (defaults to the service setting)
            squared: Test the squared series instead

        Returns:
            The test result
        """
        lags = self.lags if lags is None else int(lags)
        n = series.n
        if lags < 1:
            raise DataError(f"Ljung-Box needs lags >= 1, got {lags}")
        if lags >= n:
            raise DataError(f"Ljung-Box needs more observations ({n}) than lags ({lags})")

        x = series.values ** 2 if squared else series.values
        centered = x - np.mean(x)
        denominator = float(np.dot(centered, centered))
        if denominator <= 0 or not np.isfinite(denominator):
            raise DataError("Series is constant; autocorrelations are undefined")

        table = acorr_ljungbox(x, lags=[lags], return_df=True)
        statistic = float(table["lb_stat"].iloc[0])
        p_value = float(table["lb_pvalue"].iloc[0])
        return LjungBoxResult(lags=lags, statistic=statistic, p_value=min(1.0, max(0.0, p_value)), squared=squared)

    def diagnostics(self, series: ReturnSeries, lags: Optional[int] = None) -> Dict[str, Any]:
        """Summary statistics plus Ljung-Box on the raw and squared series, as one document."""
        document = self.summary_stats(series).to_dict()
        document["ljung_box"] = [r.to_dict() for r in self.ljung_box_pair(series, lags)]
        return document

    def ljung_box_pair(self, series: ReturnSeries, lags: Optional[int] = None) -> List[LjungBoxResult]:
        return [
            self.ljung_box(series, lags, squared=False),
            self.ljung_box(series, lags, squared=True),
        ]
