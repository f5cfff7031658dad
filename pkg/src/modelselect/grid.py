"""
Lambda path construction.
"""

from typing import Optional

import numpy as np

from src.estimator.fit import SampleLike, lambda_max, sample_covariance
from src.linalg.matrices import SymMatrix
from src.penalty.weights import WeightScheme
from src.utils.exceptions import DimensionError

DEFAULT_COUNT = 100
DEFAULT_RATIO = 1e-3


def lambda_grid(
    X: Optional[SampleLike],
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    count: int = DEFAULT_COUNT,
    ratio: float = DEFAULT_RATIO,
    S: Optional[SymMatrix] = None
) -> np.ndarray:
    """Log-spaced decreasing grid from lambda_max down to ratio * lambda_max."""
    if count < 2:
        raise DimensionError(f"grid needs at least 2 values, got {count}")
    if not 0 < ratio < 1:
        raise DimensionError(f"grid ratio must lie in (0, 1), got {ratio}")
    if S is None:
        S = sample_covariance(X)
    top = lambda_max(S, scheme)
    if not top > 0:
        raise DimensionError("sample covariance is already diagonal; lambda_max is 0")
    grid = np.geomspace(top, ratio * top, count)
    grid[0], grid[-1] = top, ratio * top
    return grid
