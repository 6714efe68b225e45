"""Exception types shared across the package."""


class NumericalError(Exception):
    """Base class for runtime numerical failures (CLI exit code 2)."""


class DomainError(NumericalError, ValueError):
    """Operand outside the mathematical domain of an operation."""


class ConsistencyError(NumericalError):
    """An internal cross-check that should hold to rounding error failed."""
