from typing import Optional


class DimensionError(ValueError):
    """Raised when matrix or vector shapes disagree with the system dimensions"""


class ConfigurationError(ValueError):
    """Raised for invalid experiment or command-line configuration"""


class ChannelError(ValueError):
    """Raised when a channel matrix cannot be zero-forced"""


class ChannelFileError(ValueError):
    """Raised when a channel CSV file cannot be parsed"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        self.row = row
        self.column = column
        if row is not None and column is not None:
            message = f"row {row}, column {column}: {message}"
        super().__init__(message)


class CovarianceError(RuntimeError):
    """Raised when a covariance matrix is not symmetric positive definite"""


class TargetOutOfRangeError(ValueError):
    """Raised when a target SER cannot be reached inside the gamma bracket"""


class SolverError(RuntimeError):
    """Raised when a QoS problem cannot be solved for a given user and quadrature"""

    def __init__(self, message: str, user: Optional[int] = None, quadrature: Optional[str] = None):
        self.user = user
        self.quadrature = quadrature
        if user is not None:
            message = f"user {user}, quadrature {quadrature}: {message}"
        super().__init__(message)
