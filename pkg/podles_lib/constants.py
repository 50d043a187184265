"""Shared constants."""

# Residual tolerance for numeric relation checks; residuals are measured against
# max(1, size of the terms), see verify
DEFAULT_TOLERANCE = 1e-9

# Radicands in [-RADICAND_SLACK, 0) are rounding noise and clamp to zero
RADICAND_SLACK = 1e-13

# Condition number above which A is treated as numerically singular
SINGULAR_CONDITION = 1e12

# Significant digits for CSV output (round-trips 64-bit floats)
CSV_DIGITS = 17

DEFAULT_SEED = 12345
DEFAULT_TRIALS = 200
DEFAULT_MAX_LEN = 4

C_INFINITY_TOKEN = "inf"
C_INFINITY_ALIASES = (C_INFINITY_TOKEN, "infinity", "∞")

# Reduced words kept in the normal-form cache
REDUCTION_CACHE_SIZE = 1 << 16

REGIME_FINITE = "c-finite"
REGIME_INFINITE = "c-infinite"
REGIMES = [REGIME_FINITE, REGIME_INFINITE]

PRESENTATION_NAMES = ["Uq", "UqPrime", "Podles", "Cross", "CrossHat", "Yc", "Decoupled", "CrossHatK"]

# Presentations whose relations do not mention c
REGIME_FREE_PRESENTATIONS = {"Uq", "UqPrime"}

REP_KINDS = ["podles", "spin", "yc", "cross1", "cross2"]

COEFF_COLUMNS = ["l", "j", "alpha_plus", "alpha_zero", "alpha_minus", "beta_plus", "beta_zero"]

# Random-word cross-check between matrices and normal forms
MORPHISM_TOLERANCE = 1e-8

# Coefficient identities (recurrences, alpharel) and the beta^0 quadratic
COEFF_TOLERANCE = 1e-10
QUADRATIC_TOLERANCE = 1e-12
