"""
Data validation schemas using Pandera.
Defines the structure of sample matrices and labeled sample files.
"""

from typing import Dict, List, Optional

import numpy as np
import pandera as pa
from pandera import Check, Column, DataFrameSchema

LABEL_COLUMN = "label"


def feature_names(p: int) -> List[str]:
    return [f"x{j}" for j in range(1, p + 1)]


def _feature_column() -> Column:
    return Column(
        pa.Float64,
        nullable=False,
        checks=[Check(np.isfinite, error="non-finite value")],
    )


class SampleSchema:
    """Schema for an n x p matrix of observations."""

    @staticmethod
    def get_schema(p: int) -> DataFrameSchema:
        """
        Every column x1..xp is a finite float.

        Args:
            p: number of variables
        """
        return DataFrameSchema(
            columns={name: _feature_column() for name in feature_names(p)},
            coerce=True,
            strict=True,
            ordered=True,
        )


class LabeledSchema:
    """Schema for observations followed by an integer class label."""

    @staticmethod
    def get_schema(p: int) -> DataFrameSchema:
        columns = {name: _feature_column() for name in feature_names(p)}
        columns[LABEL_COLUMN] = Column(
            pa.Float64,
            nullable=False,
            checks=[
                Check(np.isfinite, error="non-finite label"),
                Check(lambda s: np.mod(s, 1) == 0, error="non-integer label"),
            ],
        )
        return DataFrameSchema(columns=columns, coerce=True, strict=True, ordered=True)


class ValidationReport:
    """Container for validation results."""

    def __init__(self):
        self.total_rows = 0
        self.errors: List[Dict] = []

    def add_error(self, line: Optional[int], column: str, error_msg: str):
        """Add validation error at a 1-based file line (None when not tied to a row)."""
        self.errors.append({
            'line': line,
            'column': column,
            'error': error_msg
        })

    @property
    def valid(self) -> bool:
        return not self.errors

    def first_error(self) -> Dict:
        """Error with the smallest line number; row-level errors come first."""
        return min(
            self.errors,
            key=lambda e: (e['line'] is None, e['line'] or 0, e['column']),
        )

    def to_dict(self):
        """Convert report to dictionary."""
        return {
            'total_rows': self.total_rows,
            'invalid_rows': len({e['line'] for e in self.errors if e['line'] is not None}),
            'errors': self.errors,
        }
