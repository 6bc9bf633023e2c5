"""Exception hierarchy shared by all modules."""


class SptruncError(Exception):
    """Base class for library errors."""


class ParameterError(SptruncError, ValueError):
    """Invalid scalar parameter (dimension, index, sample count...)."""


class DimensionError(SptruncError, ValueError):
    """Matrix shape incompatible with the requested operation."""


class DomainError(SptruncError, ValueError):
    """Argument outside the domain where a formula is defined."""


class PoleError(DomainError):
    """Evaluation requested at a pole of a closed-form expression."""


class ContourError(DomainError):
    """An integrand singularity lies on or too close to the contour."""


class ConvergenceError(SptruncError, ArithmeticError):
    """An iterative evaluation did not reach the requested tolerance."""


class NumericalConsistencyError(SptruncError, ArithmeticError):
    """A quantity that must be real (or structured) came out otherwise."""


class PairingError(SptruncError, ArithmeticError):
    """Eigenvalues could not be matched into conjugate pairs."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class ConfigError(SptruncError, ValueError):
    """Experiment configuration is inconsistent."""


class StatisticsError(SptruncError, ArithmeticError):
    """Not enough data to form the requested estimate."""
