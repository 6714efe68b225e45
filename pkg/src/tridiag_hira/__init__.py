"""Eigenvectors of symmetric tridiagonal matrices with strictly
increasing diagonals and unit off-diagonals, computed coordinate-wise to
high relative accuracy, plus the supporting machinery: double-double
arithmetic, Sturm bisection, inverse power iteration, Bessel function
evaluation, and benchmark drivers."""

from .errors import ConsistencyError, DomainError, NumericalError

__all__ = ["ConsistencyError", "DomainError", "NumericalError"]

__version__ = "0.1.0"
