"""
Exception hierarchy for hierband.
Every error raised on purpose by the package derives from HierbandError.
"""

from typing import Optional


class HierbandError(Exception):
    """Base class for all package errors."""


class DataValidationError(HierbandError, ValueError):
    """Malformed or non-finite input data."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[str] = None
    ):
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DimensionError(HierbandError, ValueError):
    """Shape or precondition violation."""


class SolverError(HierbandError, RuntimeError):
    """Numerical pathology inside a solver."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ConvergenceError(SolverError):
    """Iteration budget exhausted where no usable result exists."""
