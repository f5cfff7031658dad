"""
CSV ingestion with schema validation.
Failures are reported against the 1-based line of the input file.
"""

import re
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
import pandera as pa

from src.linalg.matrices import SampleMatrix
from src.utils.exceptions import DataValidationError
from src.utils.logging_config import get_logger

from .schemas import LABEL_COLUMN, LabeledSchema, SampleSchema, ValidationReport, feature_names

logger = get_logger(__name__)

_PARSER_LINE = re.compile(r"line (\d+), saw (\d+)")
_PARSER_EXPECTED = re.compile(r"Expected (\d+) fields")


class DataValidator:
    """Validate a raw frame against a schema and collect line-level errors."""

    def __init__(self, schema: pa.DataFrameSchema, header: bool = False):
        """
        Args:
            schema: Pandera schema
            header: whether the file had a header line before the data
        """
        self.schema = schema
        self.line_offset = 2 if header else 1
        self.report = ValidationReport()

    def validate(self, df: pd.DataFrame) -> Tuple[pd.DataFrame, ValidationReport]:
        self.report = ValidationReport()
        self.report.total_rows = len(df)
        try:
            validated_df = self.schema.validate(df, lazy=True)
        except pa.errors.SchemaErrors as e:
            self._handle_schema_errors(e)
            validated_df = df
        return validated_df, self.report

    def _handle_schema_errors(self, error: pa.errors.SchemaErrors):
        for _, case in error.failure_cases.iterrows():
            index = case.get('index')
            line = int(index) + self.line_offset if pd.notna(index) else None
            self.report.add_error(
                line=line,
                column=str(case.get('column', 'unknown')),
                error_msg=str(case.get('check', 'validation failed')),
            )


def _read_raw(path: Union[str, Path], header: bool) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            header=0 if header else None,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except FileNotFoundError:
        raise DataValidationError(f"input file not found: {path}")
    except pd.errors.EmptyDataError:
        raise DataValidationError(f"input file is empty: {path}")
    except pd.errors.ParserError as exc:
        message = str(exc)
        found = _PARSER_LINE.search(message)
        expected = _PARSER_EXPECTED.search(message)
        if found:
            width = expected.group(1) if expected else "?"
            raise DataValidationError(
                f"row has {found.group(2)} fields, expected {width}",
                line=int(found.group(1)),
            )
        raise DataValidationError(f"malformed CSV: {message}")


def _validated(df: pd.DataFrame, schema: pa.DataFrameSchema, header: bool, path) -> pd.DataFrame:
    validator = DataValidator(schema, header=header)
    validated_df, report = validator.validate(df)
    if not report.valid:
        first = report.first_error()
        logger.error("input_validation_failed", path=str(path), **report.to_dict())
        raise DataValidationError(
            f"invalid value ({first['error']})",
            line=first['line'],
            column=first['column'],
        )
    logger.info("input_validated", path=str(path), rows=report.total_rows, columns=df.shape[1])
    return validated_df


def read_sample_csv(path: Union[str, Path], header: bool = False) -> SampleMatrix:
    """
    Read an n x p numeric matrix.

    Args:
        path: CSV file, one observation per line
        header: skip a leading header line

    Returns:
        SampleMatrix
    """
    df = _read_raw(path, header)
    df.columns = feature_names(df.shape[1])
    validated = _validated(df, SampleSchema.get_schema(df.shape[1]), header, path)
    return SampleMatrix(validated.to_numpy(dtype=np.float64))


def read_labeled_csv(path: Union[str, Path], header: bool = False) -> Tuple[SampleMatrix, np.ndarray]:
    """Read observations whose last column is an integer class label."""
    df = _read_raw(path, header)
    if df.shape[1] < 2:
        raise DataValidationError("labeled data needs at least one feature and a label column")
    p = df.shape[1] - 1
    df.columns = feature_names(p) + [LABEL_COLUMN]
    validated = _validated(df, LabeledSchema.get_schema(p), header, path)
    X = SampleMatrix(validated[feature_names(p)].to_numpy(dtype=np.float64))
    y = validated[LABEL_COLUMN].to_numpy(dtype=np.int64)
    return X, y
