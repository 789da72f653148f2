"""
Published reference quantiles for the GARCH(1,1)-t(4) scaling simulation.

Configuration: a0 = 0.1, a1 = 0.15, b1 = 0.8, paths of 2000 observations,
200 replications. Values are loss quantiles in percent, keyed by
(tail probability, horizon in days).
"""

REFERENCE_CONFIG = {"a0": 0.1, "a1": 0.15, "b1": 0.8, "n": 2000, "reps": 200, "df": 4.0}

# Averages of the predicted quantiles over the replications
REFERENCE_PREDICTED = {
    (0.05, 1): 7.0413,
    (0.05, 2): 9.1925,
    (0.05, 4): 12.0010,
    (0.05, 5): 13.0764,
    (0.01, 1): 13.0764,
    (0.01, 2): 17.0714,
    (0.01, 4): 22.2869,
    (0.01, 5): 24.2842,
}

# True single-period quantiles, scaled to longer horizons with alpha = 4
REFERENCE_TRUE = {
    (0.05, 1): 7.0900,
    (0.05, 2): 8.4315,
    (0.05, 4): 10.0268,
    (0.05, 5): 10.6020,
    (0.01, 1): 13.6000,
    (0.01, 2): 16.1732,
    (0.01, 4): 19.2333,
    (0.01, 5): 20.3367,
}
