"""Central tolerance table shared by runtime checks and tests."""

# f(x, x) == 0 spot check at problem construction
DIAGONAL_TOL = 1e-12
# number of points sampled for the diagonal spot check
DIAGONAL_SAMPLES = 16
# least-squares residual allowed for a consistent A x = b
AFFINE_CONSISTENCY_TOL = 1e-10
# membership of the prox base point in an affine C
AFFINE_MEMBERSHIP_TOL = 1e-8
# zero-residual threshold for membership_residual
MEMBERSHIP_TOL = 1e-12

# |lhs - rhs| <= IDENTITY_TOL * (1 + |lhs|)
IDENTITY_TOL = 1e-9

# inner prox accuracy targets
CLOSED_FORM_TOL = 1e-10
GRID_REFINE_TOL = 1e-8
# grid values within this of the minimum count as ties
GRID_TIE_TOL = 1e-12

DEFAULT_COARSE_N = 512
MIN_COARSE_N = 64
DEFAULT_REFINE_TOL = 1e-12
DEFAULT_ORACLE_RESOLUTION = 1e-6

DEFAULT_MAX_ITER = 10000

# slack allowed when asserting the monitored inequalities on benchmarks
FEJER_SLACK_TOL = 1e-8
LYAPUNOV_TOL = 1e-10
RELAXATION_TOL = 1e-12
