"""
Services for tailvar.

This package contains the estimation services: series diagnostics, tail
estimation, the GARCH filter, VaR and the Monte Carlo harness.
"""

from tailvar.services.series_service import SeriesService
from tailvar.services.tail_service import TailService
from tailvar.services.garch_service import GarchService
from tailvar.services.var_service import VarService
from tailvar.services.mc_service import McService
