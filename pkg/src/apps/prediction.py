"""
Held-out prediction error of an estimated factor.

Row r of L encodes the regression of variable r on its predecessors, so
(L x)_r is the scaled error in predicting x_r from x_1..x_{r-1}.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split as _split

from src.estimator.fit import FitResult, SampleLike, as_samples
from src.linalg.matrices import LowerTriangular, SampleMatrix
from src.utils.exceptions import DimensionError


def prediction_error(L_hat: LowerTriangular, x_tilde) -> float:
    """(1/(p-1)) sum_{r>=2} (L_hat x)_r^2."""
    x = np.asarray(x_tilde, dtype=np.float64)
    if x.ndim != 1 or x.size != L_hat.p:
        raise DimensionError(f"expected a vector of length {L_hat.p}, got shape {x.shape}")
    if L_hat.p < 2:
        raise DimensionError("prediction error needs p >= 2")
    residual = L_hat.matvec(x)[1:]
    return float(residual @ residual) / (L_hat.p - 1)


def _errors(L_hat: LowerTriangular, X: SampleMatrix) -> np.ndarray:
    if X.p != L_hat.p:
        raise DimensionError(f"test data has p={X.p}, estimate has p={L_hat.p}")
    if L_hat.p < 2:
        raise DimensionError("prediction error needs p >= 2")
    residual = L_hat.matvec(X.data)[:, 1:]
    return np.sum(residual * residual, axis=1) / (L_hat.p - 1)


def prediction_error_path(
    fits: Sequence[Union[FitResult, LowerTriangular]],
    X_test: SampleLike,
    lambdas: Optional[Sequence[float]] = None
) -> pd.DataFrame:
    """Mean and standard deviation of the per-vector error at each lambda."""
    X_test = as_samples(X_test)
    if lambdas is None:
        lambdas = [f.lambda_ if isinstance(f, FitResult) else np.nan for f in fits]
    if len(lambdas) != len(fits):
        raise DimensionError("one lambda per fit is required")

    means, sds = [], []
    for f in fits:
        L_hat = f.L_hat if isinstance(f, FitResult) else f
        errors = _errors(L_hat, X_test)
        means.append(float(errors.mean()))
        sds.append(float(errors.std(ddof=1)) if errors.size > 1 else 0.0)

    return pd.DataFrame({
        'lambda': np.asarray(lambdas, dtype=np.float64),
        'mean': means,
        'sd': sds,
    })


def split_indices(n: int, train_fraction: float = 0.5, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) row indices of a seeded random split."""
    if not 0 < train_fraction < 1:
        raise DimensionError(f"train fraction must lie in (0, 1), got {train_fraction}")
    train, test = _split(
        np.arange(n),
        train_size=train_fraction,
        random_state=int(seed) % 2 ** 32,
        shuffle=True,
    )
    return np.sort(train), np.sort(test)


def train_test_split(
    X: SampleLike,
    train_fraction: float = 0.5,
    seed: int = 0
) -> Tuple[SampleMatrix, SampleMatrix]:
    """Seeded random split of the rows."""
    X = as_samples(X)
    train, test = split_indices(X.n, train_fraction, seed)
    return X.take(train), X.take(test)
