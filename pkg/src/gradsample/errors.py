"""Exception types raised across the package."""


class GradSampleError(Exception):
    """Base class for all package errors."""


class SingularGram(GradSampleError, ArithmeticError):
    """The (weighted) Gram matrix is numerically singular."""


class EmptyDraw(GradSampleError):
    """A Poisson draw selected no rows."""


class DegenerateGradients(GradSampleError, ArithmeticError):
    """All per-row gradient norms vanish, so no sampling distribution exists."""


class DivisionByZeroProb(GradSampleError, ZeroDivisionError):
    """A row with nonzero norm has sampling probability zero."""


class ParseError(GradSampleError, ValueError):
    """A CSV or config file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class DimensionMismatch(GradSampleError, ValueError):
    """Array shapes are inconsistent."""


class ExcessiveFailures(GradSampleError):
    """Too many replications of an experiment failed."""
