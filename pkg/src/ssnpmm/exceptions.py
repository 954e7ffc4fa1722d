"""Exception hierarchy shared across the package."""


class SsnPmmError(Exception):
    """Base class for all package errors."""


class ParseError(SsnPmmError):
    """A manifest, vector, or Matrix Market file could not be parsed."""


class ValidationError(SsnPmmError):
    """Problem data violates a structural invariant (symmetry, signs, NaN)."""


class DimensionMismatch(SsnPmmError, ValueError):
    """Array or matrix shapes are inconsistent."""


class IoError(SsnPmmError, OSError):
    """Reading or writing a file failed."""


class LinearSolverError(SsnPmmError):
    """Base class for factorization and Krylov failures."""


class NotPositiveDefinite(LinearSolverError):
    """A Cholesky-type factorization met a nonpositive pivot."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class FactorizationBreakdown(LinearSolverError):
    """An LDL^T factorization met a zero or non-finite pivot."""

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class PreconditionerBreakdown(LinearSolverError):
    """The preconditioner produced a nonpositive inner product."""


class LineSearchFailure(SsnPmmError):
    """Backtracking exhausted its budget without sufficient decrease."""


class TooLarge(SsnPmmError):
    """A dense diagnostic was requested on a system above its size guard."""
