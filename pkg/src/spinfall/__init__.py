"""Spin-1/2 Wigner rotation along radial infall into a Schwarzschild black hole."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DecompositionError,
    DomainError,
    SingularInputError,
    SpinfallError,
    StepError,
)

__version__ = "0.1.0"
