"""
settings.py

Limits and tolerances shared across treequery. Operations take these as
keyword defaults so a caller can tighten or relax them per call.
"""

# Largest n for which any verifier enumerates all 2^n inputs.
MAX_ENUM_N = 20
# Largest n for the restriction DPs over truth tables (rank and game value).
MAX_DP_N = 12
# Default n cap for pairwise dual-adversary checks (4^n pairs).
DEFAULT_PAIRWISE_N = 12

MAX_EXHAUSTIVE_INTERNAL = 16
MAX_ORACLE_INTERNAL = 8
MAX_EXHAUSTIVE_LEAVES = 8

CLOSED_FORM_RTOL = 1e-9
RESIDUAL_ATOL = 1e-9
PROBABILITY_ATOL = 1e-12
RANDOMIZED_ERROR = 1.0 / 3.0

ORACLE_BOX = (1e-4, 1e4)
ORACLE_START_BOX = (1e-2, 1e2)
ORACLE_RESTARTS = 20
ORACLE_DEFAULT_RTOL = 1e-2
