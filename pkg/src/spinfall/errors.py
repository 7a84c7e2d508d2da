"""Exception types raised by the simulator."""


class SpinfallError(Exception):
    """Base class for all simulator errors."""


class DomainError(SpinfallError, ValueError):
    """A point or parameter lies outside the region where a quantity is defined."""


class ConvergenceError(SpinfallError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class StepError(SpinfallError):
    """A worldline sample violated a validity condition.

    ``index`` is the offending sample index.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularInputError(SpinfallError, ZeroDivisionError):
    """A denominator of the step matrix vanishes."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DecompositionError(SpinfallError, ValueError):
    """A map is not of the form p I - (1 - q) sigma_1."""


class ConfigError(SpinfallError, ValueError):
    """Invalid run configuration."""
