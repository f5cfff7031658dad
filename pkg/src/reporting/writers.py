"""
Artifact writers.
Floats are written with 17 significant digits so every CSV reads back bit-exactly.
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

from src.linalg.matrices import LowerTriangular, SymMatrix, as_array
from src.utils.exceptions import DataValidationError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_matrix_csv(path: PathLike, matrix: Union[np.ndarray, SymMatrix, LowerTriangular]) -> Path:
    """Dense matrix without header; a LowerTriangular is written with zeros above the diagonal."""
    path = _prepare(path)
    data = np.atleast_2d(as_array(matrix))
    np.savetxt(path, data, delimiter=",", fmt=FLOAT_FORMAT)
    logger.debug("matrix_written", path=str(path), shape=list(data.shape))
    return path


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """Inverse of write_matrix_csv."""
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataValidationError(f"cannot read matrix from {path}: {exc}")
    return data


def write_table_csv(path: PathLike, table: pd.DataFrame) -> Path:
    path = _prepare(path)
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug("table_written", path=str(path), rows=len(table))
    return path


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    path = _prepare(path)

    def convert_types(obj):
        """Convert numpy scalars and arrays to Python natives."""
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        return str(obj)

    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, default=convert_types)
    return path
