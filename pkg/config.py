import logging

# Tolleranze numeriche (lette a runtime: i test possono modificarle)
PRUNE_TOL = 1e-14        # ampiezze con modulo inferiore vengono scartate
NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
BRANCH_TOL = 1e-12       # rami sotto soglia non compaiono nei report
IMPOSSIBLE_TOL = 1e-15   # probabilità sotto soglia = evento impossibile
VERIFY_TOL = 1e-10       # confronto sparse/oracolo in --verify

MAX_FACTORIAL_CUTOFF = 20
DEFAULT_CUTOFF_POLICY = "grow"  # oppure "strict"

# Limiti dell'oracolo denso
DENSE_MAX_MODES = 8
DENSE_MAX_CUTOFF = 3

# Valori di default degli schemi (|tau|^2 = 1e-3 come nel caso di riferimento)
DEFAULT_TAU2 = 1e-3
DEFAULT_EPSILON = 0.1
DEFAULT_ETA = 1.0
DEFAULT_ORDER = 1
DEFAULT_THETA = 0.1
DEFAULT_SHOTS = 10000
DEFAULT_SEED = 12345

FLOAT_FORMAT = "%.12g"

LOG_LEVEL = logging.WARNING
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
