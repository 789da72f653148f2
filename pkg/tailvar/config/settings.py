"""
Application settings and configuration.

This module centralizes all configuration parameters for tailvar.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base paths
BASE_DIR = Path(__file__).resolve().parent.parent.parent
PACKAGE_DIR = BASE_DIR / "tailvar"

# File paths
GARCH_CONFIG_FILE = PACKAGE_DIR / "config" / "garch_config.json"

# Runtime settings
THREADS = max(1, int(os.getenv("TAILVAR_THREADS", os.cpu_count() or 1)))
LOG_LEVEL = os.getenv("TAILVAR_LOG_LEVEL", "INFO")

# Series diagnostics
LJUNG_BOX_LAGS = 12
MIN_SUMMARY_OBS = 4

# Tail estimation
DEFAULT_TAIL = "lower"
DEFAULT_TAIL_METHOD = "huisman"
PHILLIPS_MIN_OBS = 100
HUISMAN_MIN_ETA = 10
FINITE_VARIANCE_Z = 1.645

# GARCH filter
T_DF = 4
GARCH_MIN_OBS = 250
GARCH_MAX_ITER = 500
GARCH_BOUNDARY_TOL = 1e-6
QUADRATURE_BOUND = 60.0

# VaR
DEFAULT_PROBABILITIES = (0.05, 0.005)
DEFAULT_HORIZONS = (1, 2, 4, 5)

# Monte Carlo
MC_DEFAULTS = {
    "a0": 0.1,
    "a1": 0.15,
    "b1": 0.8,
    "n": 2000,
    "reps": 200,
    "horizons": (1, 2, 4, 5),
    "seed": 42,
    "burn_in": 1000,
}
MC_PROBABILITIES = (0.05, 0.01)
MC_MAX_FAILURE_RATE = 0.10
