"""
Exception hierarchy shared by the series, oracle and analytic layers.
"""


class SubcriticalError(Exception):
    """Base class for every error raised by this package."""


class SeriesError(SubcriticalError, ValueError):
    """A power series does not satisfy the precondition of an operation."""


class DomainError(SubcriticalError, ValueError):
    """A numeric or combinatorial argument lies outside the supported domain."""


class ConsistencyError(SubcriticalError, RuntimeError):
    """Two independent computations of the same object disagree."""


class DivergenceError(SubcriticalError, ArithmeticError):
    """A numeric fixed-point evaluation left the region where it converges."""
