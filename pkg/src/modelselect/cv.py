"""
K-fold cross-validation along a lambda path with the one-standard-error rule.

Each fold fits the whole path with warm starts on its training rows and
scores every lambda on its validation rows. Lower scores are better.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.model_selection import KFold

from src.estimator.fit import SampleLike, as_samples, fit_path
from src.linalg.matrices import LowerTriangular, SampleMatrix
from src.penalty.weights import WeightScheme
from src.rowsolver.config import SolverConfig
from src.utils.exceptions import DimensionError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class CVResult:
    """Per-lambda fold means and standard errors; indices point into lambdas."""

    lambdas: np.ndarray
    mean_score: np.ndarray
    se_score: np.ndarray
    best_idx: int
    one_se_idx: int
    fold_scores: np.ndarray

    @property
    def best_lambda(self) -> float:
        return float(self.lambdas[self.best_idx])

    @property
    def one_se_lambda(self) -> float:
        return float(self.lambdas[self.one_se_idx])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'lambda': self.lambdas,
            'mean_score': self.mean_score,
            'se_score': self.se_score,
        })

    def selection(self) -> Dict:
        return {
            'best_idx': self.best_idx,
            'best_lambda': self.best_lambda,
            'one_se_idx': self.one_se_idx,
            'one_se_lambda': self.one_se_lambda,
            'folds': int(self.fold_scores.shape[0]),
        }


def negative_log_likelihood(L: LowerTriangular, X: SampleMatrix) -> float:
    """(1/n) sum_i ||L x_i||^2 - 2 sum_r log L_rr."""
    residual = L.matvec(X.data)
    return float(np.mean(np.sum(residual * residual, axis=1)) - 2.0 * np.sum(np.log(L.diagonal())))


def select_indices(mean_score: np.ndarray, se_score: np.ndarray) -> Tuple[int, int]:
    """
    best: minimal mean score (first on ties, i.e. the larger lambda).
    one_se: largest lambda whose mean is within one SE of the best.
    """
    best = int(np.argmin(mean_score))
    within = np.flatnonzero(mean_score <= mean_score[best] + se_score[best])
    return best, int(within[0])


def summarize(lambdas: Sequence[float], fold_scores: np.ndarray) -> CVResult:
    """Aggregate a (folds x lambdas) score table."""
    fold_scores = np.asarray(fold_scores, dtype=np.float64)
    k = fold_scores.shape[0]
    mean = fold_scores.mean(axis=0)
    se = fold_scores.std(axis=0, ddof=1) / np.sqrt(k)
    best, one_se = select_indices(mean, se)
    return CVResult(
        lambdas=np.asarray(lambdas, dtype=np.float64),
        mean_score=mean,
        se_score=se,
        best_idx=best,
        one_se_idx=one_se,
        fold_scores=fold_scores,
    )


def fold_indices(n: int, k: int, seed: int = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(train, validation) index pairs: contiguous blocks of a seeded permutation."""
    if not 2 <= k <= n:
        raise DimensionError(f"need 2 <= k <= n, got k={k}, n={n}")
    splitter = KFold(n_splits=k, shuffle=True, random_state=int(seed) % 2 ** 32)
    return list(splitter.split(np.arange(n)))


def run_folds(
    folds: Sequence[Tuple[np.ndarray, np.ndarray]],
    task: Callable[[int, np.ndarray, np.ndarray], np.ndarray],
    threads: Optional[int] = None
) -> np.ndarray:
    """Evaluate task(fold, train, val) -> per-lambda scores for every fold, in fold order."""
    def guarded(f: int) -> np.ndarray:
        train, val = folds[f]
        try:
            scores = task(f, train, val)
        except DimensionError as exc:
            raise DimensionError(f"fold {f + 1}: {exc}") from exc
        logger.debug("cv_fold_completed", fold=f + 1, n_train=int(train.size), n_val=int(val.size))
        return np.asarray(scores, dtype=np.float64)

    if threads == 1:
        rows = [guarded(f) for f in range(len(folds))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(guarded, range(len(folds))))
    return np.vstack(rows)


def cross_validate(
    X: SampleLike,
    grid: Sequence[float],
    k: int = DEFAULT_FOLDS,
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    seed: int = 0,
    threads: Optional[int] = None,
    center: bool = False
) -> CVResult:
    """
    Validation negative log-likelihood of the path estimate, per lambda.

    Args:
        X: n x p samples
        grid: decreasing lambda path
        k: number of folds
        scheme: group weights
        cfg: ADMM settings
        seed: fold shuffling seed
        threads: fold worker cap
        center: center each fold with its training means

    Returns:
        CVResult with best and one-SE selections
    """
    X = as_samples(X)
    cfg = cfg or SolverConfig()
    grid = np.asarray(grid, dtype=np.float64)
    folds = fold_indices(X.n, k, seed)

    def task(f: int, train: np.ndarray, val: np.ndarray) -> np.ndarray:
        X_train, X_val = X.take(train), X.take(val)
        if center:
            means = X_train.data.mean(axis=0)
            X_train = SampleMatrix(X_train.data - means)
            X_val = SampleMatrix(X_val.data - means)
        fits = fit_path(X_train, grid, scheme, cfg, threads=1)
        return np.array([negative_log_likelihood(fit.L_hat, X_val) for fit in fits])

    result = summarize(grid, run_folds(folds, task, threads))
    logger.info(
        "cv_completed",
        folds=k,
        n_lambdas=int(grid.size),
        best_lambda=result.best_lambda,
        one_se_lambda=result.one_se_lambda,
    )
    return result
