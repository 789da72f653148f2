"""
Published single- and multi-period VaR tables must be reproducible from their
single-period columns and tail indices by the scaling rules alone.

Values are rounded to two decimals in the source, hence the 0.03 tolerance.
"""

import pytest

from tailvar.data.reference_values import REFERENCE_TRUE
from tailvar.models.domain import VarEstimate
from tailvar.services.var_service import VarService

HORIZONS = (2, 4, 5)
TOLERANCE = 0.03

# OBX conditional p99.5 prints 5.87 and 6.31 at 4 and 5 days; alpha = 3.14 from 3.75 gives
# 5.83 and 6.26, beyond what two-decimal rounding of the inputs explains
ROUNDING_EXCEPTIONS = {("OBX", "p99.5"): (4, 5)}

# contract: (alpha on returns, single-period p95, p99.5, multi-period p95 at 2/4/5, p99.5 at 2/4/5)
UNCONDITIONAL = {
    "BEL20": (3.02, 1.45, 3.11, (1.83, 2.30, 2.47), (3.92, 4.93, 5.30)),
    "KFX": (2.86, 1.81, 4.06, (2.31, 2.95, 3.19), (5.17, 6.59, 7.12)),
    "CAC40": (3.25, 2.45, 4.19, (3.04, 3.76, 4.02), (5.19, 6.42, 6.87)),
    "AEX": (3.24, 2.01, 4.09, (2.49, 3.08, 3.30), (5.06, 6.27, 6.72)),
    "DAX": (3.05, 1.75, 3.73, (2.20, 2.76, 2.97), (4.68, 5.88, 6.32)),
    "MIF30": (3.30, 2.65, 5.32, (3.26, 4.03, 4.31), (6.56, 8.09, 8.66)),
    "OBX": (2.45, 1.56, 4.01, (2.08, 2.76, 3.02), (5.31, 7.05, 7.73)),
    "PSI20": (2.32, 2.42, 6.32, (3.26, 4.39, 4.83), (8.52, 11.49, 12.65)),
    "IBEX35": (2.92, 2.36, 5.18, (2.99, 3.79, 4.09), (6.57, 8.33, 9.00)),
    "OMX": (2.85, 2.55, 5.73, (3.26, 4.15, 4.49), (7.31, 9.32, 10.08)),
    "FTSE100": (3.00, 1.62, 3.50, (2.05, 2.58, 2.78), (4.41, 5.56, 5.99)),
    "SWISS": (3.02, 1.39, 2.99, (1.75, 2.21, 2.37), (3.76, 4.73, 5.09)),
}

# contract: (alpha on filtered returns, extreme-value rows, Gaussian rows), rows as above
CONDITIONAL = {
    "BEL20": (3.98, (1.81, 3.29, (2.16, 2.57, 2.72), (3.91, 4.65, 4.92)),
              (1.49, 3.24, (2.10, 2.97, 3.32), (4.58, 6.48, 7.24))),
    "KFX": (3.56, (2.09, 3.90, (2.54, 3.09, 3.29), (4.74, 5.76, 6.14)),
            (1.86, 3.89, (2.63, 3.72, 4.16), (5.50, 7.77, 8.69))),
    "CAC40": (3.51, (2.41, 4.64, (2.94, 3.58, 3.81), (5.65, 6.88, 7.33)),
              (2.02, 4.16, (2.86, 4.04, 4.51), (5.89, 8.33, 9.31))),
    "AEX": (3.15, (2.39, 5.16, (2.97, 3.70, 3.98), (6.44, 8.02, 8.61)),
            (1.92, 3.84, (2.71, 3.84, 4.29), (5.43, 7.69, 8.59))),
    "DAX": (4.10, (2.24, 4.01, (2.66, 3.14, 3.32), (4.75, 5.62, 5.94)),
            (1.62, 3.54, (2.29, 3.23, 3.62), (5.00, 7.07, 7.91))),
    "MIF30": (4.06, (3.27, 5.66, (3.88, 4.60, 4.86), (6.71, 7.96, 8.41)),
              (2.78, 5.28, (3.94, 5.57, 6.23), (7.47, 10.57, 11.81))),
    "OBX": (3.14, (1.49, 3.75, (1.86, 2.33, 2.50), (4.69, 5.87, 6.31)),
            (1.47, 4.36, (2.08, 2.94, 3.29), (6.16, 8.71, 9.74))),
    "PSI20": (3.51, (2.76, 7.68, (3.36, 4.10, 4.36), (9.36, 11.40, 12.15)),
              (2.47, 6.49, (3.49, 4.94, 5.52), (9.18, 12.99, 14.52))),
    "IBEX35": (3.26, (2.60, 5.14, (3.21, 3.97, 4.25), (6.36, 7.87, 8.43)),
               (2.34, 5.90, (3.31, 4.68, 5.23), (8.35, 11.80, 13.20))),
    "OMX": (3.40, (2.62, 5.06, (3.21, 3.93, 4.20), (6.21, 7.61, 8.13)),
            (2.40, 5.69, (3.39, 4.79, 5.36), (8.04, 11.37, 12.72))),
    "FTSE100": (3.75, (2.20, 4.03, (2.65, 3.19, 3.39), (4.85, 5.83, 6.19)),
                (1.68, 3.59, (2.38, 3.36, 3.76), (5.08, 7.18, 8.03))),
    "SWISS": (3.09, (1.78, 3.58, (2.23, 2.79, 2.99), (4.48, 5.60, 6.02)),
              (1.45, 3.00, (2.06, 2.91, 3.25), (4.24, 6.00, 6.71))),
}


def scaled_row(service, single, alpha, method):
    base = VarEstimate(p=0.05, horizon_n=1, var_pct=single, method=method)
    return [service.scale_var(base, h, alpha).var_pct for h in HORIZONS]


def assert_row(actual, printed, skip=()):
    for h, got, want in zip(HORIZONS, actual, printed):
        if h not in skip:
            assert got == pytest.approx(want, abs=TOLERANCE), f"horizon {h}"


@pytest.fixture(scope="module")
def service():
    return VarService()


@pytest.mark.parametrize("contract", sorted(UNCONDITIONAL))
def test_unconditional_table_follows_alpha_root_scaling(service, contract):
    alpha, p95, p995, multi95, multi995 = UNCONDITIONAL[contract]

    assert_row(scaled_row(service, p95, alpha, "evt_unconditional"), multi95)
    assert_row(scaled_row(service, p995, alpha, "evt_unconditional"), multi995)


@pytest.mark.parametrize("contract", sorted(CONDITIONAL))
def test_conditional_table_follows_alpha_root_scaling(service, contract):
    alpha, (p95, p995, multi95, multi995), _ = CONDITIONAL[contract]

    assert_row(scaled_row(service, p95, alpha, "evt_conditional"), multi95,
               ROUNDING_EXCEPTIONS.get((contract, "p95"), ()))
    assert_row(scaled_row(service, p995, alpha, "evt_conditional"), multi995,
               ROUNDING_EXCEPTIONS.get((contract, "p99.5"), ()))


@pytest.mark.parametrize("contract", sorted(CONDITIONAL))
def test_gaussian_table_follows_square_root_scaling(service, contract):
    _, _, (p95, p995, multi95, multi995) = CONDITIONAL[contract]

    # alpha = 2 gives the square-root-of-time rule
    assert_row(scaled_row(service, p95, 2.0, "gaussian_conditional"), multi95)
    assert_row(scaled_row(service, p995, 2.0, "gaussian_conditional"), multi995)


@pytest.mark.parametrize("contract", sorted(UNCONDITIONAL))
def test_alpha_root_multiplier_is_below_square_root(service, contract):
    alpha = UNCONDITIONAL[contract][0]
    base = VarEstimate(p=0.005, horizon_n=1, var_pct=1.0, method="evt_unconditional")

    for h in HORIZONS:
        assert service.scale_var(base, h, alpha).scale_q < h ** 0.5


def test_exempt_obx_entries_are_the_only_rounding_misses(service):
    alpha, (_, p995, _, multi995), _ = CONDITIONAL["OBX"]
    misses = [h for h, got, want in zip(HORIZONS, scaled_row(service, p995, alpha, "evt_conditional"), multi995)
              if abs(got - want) > TOLERANCE]

    assert tuple(misses) == ROUNDING_EXCEPTIONS[("OBX", "p99.5")]


@pytest.mark.parametrize("p", [0.05, 0.01])
def test_simulation_true_row_is_fourth_root_scaling(service, p):
    base = VarEstimate(p=p, horizon_n=1, var_pct=REFERENCE_TRUE[(p, 1)], method="evt_unconditional")

    for h in HORIZONS:
        assert service.scale_var(base, h, 4.0).var_pct == pytest.approx(REFERENCE_TRUE[(p, h)], abs=1e-4)
