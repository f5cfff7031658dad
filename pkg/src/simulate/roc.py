"""
Support-recovery curves along a lambda path.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.estimator.fit import SampleLike, fit_path
from src.estimator.support import sign_support
from src.linalg.matrices import LowerTriangular
from src.penalty.weights import WeightScheme
from src.rowsolver.config import SolverConfig
from src.utils.exceptions import DimensionError


def roc_curve(
    X: SampleLike,
    L_true: LowerTriangular,
    lambda_grid: Sequence[float],
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    threads: Optional[int] = None
) -> List[Tuple[float, float]]:
    """(sensitivity, specificity) of the warm-started estimate at each lambda."""
    if len(lambda_grid) == 0:
        raise DimensionError("lambda grid is empty")
    if np.any(np.diff(np.asarray(lambda_grid, dtype=np.float64)) > 0):
        raise DimensionError("lambda grid must be non-increasing")
    cfg = cfg or SolverConfig()
    fits = fit_path(X, lambda_grid, scheme, cfg, threads)
    points = []
    for result in fits:
        report = sign_support(result, L_true, threshold=cfg.support_threshold)
        points.append((report.sensitivity, report.specificity))
    return points


def roc_frame(lambda_grid: Sequence[float], points: Sequence[Tuple[float, float]]) -> pd.DataFrame:
    """Plot-ready table with one row per lambda."""
    sens, spec = zip(*points) if points else ((), ())
    return pd.DataFrame({
        'lambda': np.asarray(lambda_grid, dtype=np.float64),
        'sensitivity': np.asarray(sens, dtype=np.float64),
        'specificity': np.asarray(spec, dtype=np.float64),
    })


def perfect_recovery(points: Sequence[Tuple[float, float]]) -> bool:
    """True when some lambda recovers the support exactly."""
    return any(s == 1.0 and t == 1.0 for s, t in points)
