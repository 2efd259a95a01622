"""
Numerical defaults for the mediation package.
"""
import math

# Ridge constant of the RHOLP screening estimator.
RIDGE_K = 1.0

# Regularization of the approximate-orthogonalization projection.
AO_DELTA = 1.0

# Tuning constant of the composite-null proportion estimates.
NULL_LAMBDA = 0.5

# Target FDR level.
ALPHA_LEVEL = 0.05

# Minimum number of observations in a Dataset.
MIN_SAMPLES = 4

# |1 - m'G^-1 m| below this switches the projection to a direct solve.
DOWNDATE_TOL = 1e-12

# |v'M_j| must exceed this multiple of ||v|| ||M_j||.
PROJECTION_TOL = 1e-12

# Relative size of a QR diagonal entry below which a column is collinear.
COLLINEAR_TOL = 1e-10

# Seed of the fixed row split used by the refitted cross-validation of sigma_eps2.
RCV_SEED = 20240611

# Slack on the composite-null proportion sum.
PROPORTION_SLACK = 1e-9

# Relative rounding slack when an FDR estimate is compared with its level.
FDR_SLACK = 1e-12

# Simulation defaults.
SIM_N = 400
SIM_GAMMA = 0.5
SIM_X_VARIANCE = 1.5
SIM_EPS_VARIANCE = 1.0
SIM_REPLICATIONS = 500
SIM_COEF_RANGE = (0.3, 1.0)
SIM_MAX_REDRAWS = 10


def screen_size(n: int) -> int:
    """Candidate set size for RHOLP screening, ceil(n / log n)."""
    return math.ceil(n / math.log(n))


def baseline_screen_size(n: int) -> int:
    """Candidate set size for the SIS baselines, ceil(2n / log n)."""
    return math.ceil(2 * n / math.log(n))
