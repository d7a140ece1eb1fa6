from enum import Enum


class PulseKind(str, Enum):
    RAISED_COSINE = "raised_cosine"
    ROOT_RAISED_COSINE = "root_raised_cosine"


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


class SigmaMode(str, Enum):
    CORRELATED = "correlated"
    WHITE = "white"


class ChannelMode(str, Enum):
    FIXED = "fixed"
    REDRAW = "redraw"


class Quadrature(str, Enum):
    IN_PHASE = "I"
    QUADRATURE = "Q"


class SweepParameter(str, Enum):
    GAMMA = "gamma"
    N_SYMBOLS = "n_symbols"
    N_TX = "n_tx"
    TARGET_SER = "target_ser"
