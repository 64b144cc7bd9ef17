"""Exception types shared across the package."""

from __future__ import annotations


class SchattenLabError(Exception):
    """Base class for every error raised by this library."""


class DimensionError(SchattenLabError, ValueError):
    """Operand shapes or family sizes are incompatible."""


class HermiticityError(SchattenLabError, ValueError):
    """A matrix required to be Hermitian is not, beyond the admission tolerance."""


class ConvergenceError(SchattenLabError, RuntimeError):
    """The eigensolver did not reach its threshold within the sweep cap."""

    def __init__(self, message: str, off_diagonal_norm: float):
        super().__init__(message)
        self.off_diagonal_norm = off_diagonal_norm


class ConsistencyError(SchattenLabError, ArithmeticError):
    """A numerical cross-check failed by more than roundoff can explain.

    Raised e.g. when a Gram matrix shows an eigenvalue far below zero, or when
    the singular-value route of the 2-norm disagrees with the entrywise norm.
    """


class PositivityError(SchattenLabError, ValueError):
    """A family member required to be positive semidefinite is not."""

    def __init__(self, message: str, index: int, min_eigenvalue: float):
        super().__init__(message)
        self.index = index
        self.min_eigenvalue = min_eigenvalue


class PreconditionError(SchattenLabError, ValueError):
    """A documented precondition on user-supplied input is violated."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ValidationError(SchattenLabError, ValueError):
    """Malformed value, specification, plan, or serialized document."""


class RankDeficiencyError(SchattenLabError, ValueError):
    """A least-squares design matrix is numerically rank deficient."""
