"""Exception hierarchy shared by all modules."""


class SplineNoiseError(Exception):
    """Base class for errors raised by this package."""


class DomainError(SplineNoiseError, ValueError):
    """An interval, abscissa or index lies outside its valid range."""


class DecompositionError(SplineNoiseError, ArithmeticError):
    """A matrix decomposition could not be carried out (non-finite input)."""


class NotPSDError(SplineNoiseError, ArithmeticError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class SingularSystemError(SplineNoiseError, ArithmeticError):
    """The regularized normal matrix is numerically singular."""


class DetectionError(SplineNoiseError, ValueError):
    """Detection is undefined for the given residual (all zero or non-finite)."""


class DegenerateWeightError(SplineNoiseError, ValueError):
    """The oracle weight C^(-1/2) does not exist because sigma is zero."""


class ConfigError(SplineNoiseError, ValueError):
    """An experiment configuration is missing keys or has invalid values."""


class ExcessiveFailuresError(SplineNoiseError, RuntimeError):
    """More than the allowed fraction of Monte Carlo trials failed."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
