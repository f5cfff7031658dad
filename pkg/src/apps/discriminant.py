"""
Discriminant analysis with penalized inverse Cholesky estimates.

LDA fits one factor on class-centered pooled data and scores in the factored
form (L x)^T (L mu_k) - 1/2 ||L mu_k||^2 + log pi_k. QDA fits one factor per
class and scores with the class log-density
-1/2 ||L_k (x - mu_k)||^2 + sum_r log L_k,rr + log pi_k.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix as _confusion_matrix
from sklearn.model_selection import StratifiedKFold

from src.estimator.fit import SampleLike, as_samples, fit, fit_path, lambda_max, sample_covariance
from src.linalg.matrices import LowerTriangular, SampleMatrix
from src.modelselect.cv import DEFAULT_FOLDS, CVResult, cross_validate, run_folds, summarize
from src.modelselect.grid import DEFAULT_COUNT, DEFAULT_RATIO
from src.penalty.weights import WeightScheme
from src.rowsolver.config import SolverConfig
from src.utils.exceptions import DimensionError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

CRITERIA = ('likelihood', 'misclassification')
PREDICT_CHUNK = 1024


class Mode(str, Enum):
    LDA = "lda"
    QDA = "qda"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown discriminant mode {value!r}; expected lda or qda")


@dataclass(frozen=True)
class ClassParams:
    label: int
    mu_hat: np.ndarray
    L_hat: LowerTriangular
    log_pi: float
    lambda_: float = float('nan')


@dataclass(frozen=True)
class ClassModel:
    """Per-class parameters ordered by label; LDA classes share one factor object."""

    classes: Tuple[ClassParams, ...]
    mode: Mode

    def __post_init__(self):
        object.__setattr__(self, 'mode', Mode.parse(self.mode))
        if len(self.classes) < 2:
            raise DimensionError("a classifier needs at least 2 classes")
        total = float(np.sum(np.exp([c.log_pi for c in self.classes])))
        if abs(total - 1.0) > 1e-12:
            raise DimensionError(f"class priors sum to {total}, expected 1")
        if self.mode is Mode.LDA and len({id(c.L_hat) for c in self.classes}) != 1:
            raise DimensionError("LDA classes must share a single factor")

    @property
    def labels(self) -> np.ndarray:
        return np.array([c.label for c in self.classes])

    @property
    def p(self) -> int:
        return self.classes[0].L_hat.p

    def scores(self, X) -> np.ndarray:
        """(m x K) discriminant scores."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.p:
            raise DimensionError(f"expected {self.p} features, got {X.shape[1]}")
        out = np.empty((X.shape[0], len(self.classes)))
        if self.mode is Mode.LDA:
            L = self.classes[0].L_hat
            LX = L.matvec(X)
            for j, c in enumerate(self.classes):
                Lmu = L.matvec(c.mu_hat)
                out[:, j] = LX @ Lmu - 0.5 * float(Lmu @ Lmu) + c.log_pi
        else:
            for j, c in enumerate(self.classes):
                R = c.L_hat.matvec(X - c.mu_hat)
                logdet = float(np.sum(np.log(c.L_hat.diagonal())))
                out[:, j] = -0.5 * np.sum(R * R, axis=1) + logdet + c.log_pi
        return out


def _check_labels(X: SampleMatrix, y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.size != X.n:
        raise DimensionError(f"expected {X.n} labels, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise DimensionError("labels must be integers")
        y = y.astype(np.int64)
    labels, counts = np.unique(y, return_counts=True)
    if labels.size < 2:
        raise DimensionError("need at least 2 classes")
    small = labels[counts < 2]
    if small.size:
        raise DimensionError(f"class {int(small[0])} has fewer than 2 samples")
    return y


def _class_stats(X: SampleMatrix, y: np.ndarray):
    labels = np.unique(y)
    means = np.vstack([X.data[y == c].mean(axis=0) for c in labels])
    counts = np.array([np.sum(y == c) for c in labels], dtype=np.float64)
    log_pi = np.log(counts / counts.sum())
    return labels, means, log_pi


def _centered(X: SampleMatrix, y: np.ndarray, labels, means) -> SampleMatrix:
    index = np.searchsorted(labels, y)
    return SampleMatrix(X.data - means[index])


def _build(mode: Mode, labels, means, log_pi, factors, lambdas) -> ClassModel:
    return ClassModel(
        classes=tuple(
            ClassParams(
                label=int(label),
                mu_hat=means[j],
                L_hat=factors[0] if mode is Mode.LDA else factors[j],
                log_pi=float(log_pi[j]),
                lambda_=float(lambdas[0] if mode is Mode.LDA else lambdas[j]),
            )
            for j, label in enumerate(labels)
        ),
        mode=mode,
    )


def classifier_grid(
    X: SampleLike,
    y,
    mode: Mode = Mode.LDA,
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    count: int = DEFAULT_COUNT,
    ratio: float = DEFAULT_RATIO
) -> np.ndarray:
    """Decreasing grid from the largest lambda_max over the matrices the classifier fits."""
    X = as_samples(X)
    y = _check_labels(X, y)
    mode = Mode.parse(mode)
    labels, means, _ = _class_stats(X, y)
    if mode is Mode.LDA:
        blocks = [_centered(X, y, labels, means)]
    else:
        blocks = [SampleMatrix(X.data[y == c] - means[j]) for j, c in enumerate(labels)]
    top = max(lambda_max(sample_covariance(block), scheme) for block in blocks)
    if not top > 0:
        raise DimensionError("class covariances are already diagonal; lambda_max is 0")
    return np.geomspace(top, ratio * top, count)


def misclassification_rate(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise DimensionError("label vectors differ in length")
    return float(np.mean(y_true != y_pred))


def confusion_matrix(y_true, y_pred, labels: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """Counts with true labels on rows and predicted labels on columns."""
    if labels is None:
        labels = np.unique(np.concatenate([np.asarray(y_true), np.asarray(y_pred)]))
    table = _confusion_matrix(y_true, y_pred, labels=labels)
    return pd.DataFrame(
        table,
        index=pd.Index(labels, name='true'),
        columns=pd.Index(labels, name='predicted'),
    )


def predict(model: ClassModel, X, threads: Optional[int] = None) -> np.ndarray:
    """Labels for the rows of X; ties go to the lowest class index."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    chunks = [X[i:i + PREDICT_CHUNK] for i in range(0, X.shape[0], PREDICT_CHUNK)]
    if threads == 1 or len(chunks) <= 1:
        parts = [np.argmax(model.scores(chunk), axis=1) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda chunk: np.argmax(model.scores(chunk), axis=1), chunks))
    index = np.concatenate(parts) if parts else np.zeros(0, dtype=np.intp)
    return model.labels[index]


def classify(model: ClassModel, x) -> int:
    """Label of a single observation."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected a single vector, got shape {x.shape}")
    return int(predict(model, x[None, :], threads=1)[0])


def cross_validate_classifier(
    X: SampleLike,
    y,
    grid: Sequence[float],
    mode: Mode = Mode.LDA,
    k: int = DEFAULT_FOLDS,
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    seed: int = 0,
    threads: Optional[int] = None
) -> CVResult:
    """Validation misclassification rate per lambda over stratified folds."""
    X = as_samples(X)
    y = _check_labels(X, y)
    mode = Mode.parse(mode)
    cfg = cfg or SolverConfig()
    grid = np.asarray(grid, dtype=np.float64)

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=int(seed) % 2 ** 32)
    folds = list(splitter.split(X.data, y))

    def task(f: int, train: np.ndarray, val: np.ndarray) -> np.ndarray:
        X_train, y_train = X.take(train), y[train]
        labels, means, log_pi = _class_stats(X_train, y_train)
        if mode is Mode.LDA:
            paths = [fit_path(_centered(X_train, y_train, labels, means), grid, scheme, cfg, threads=1)]
        else:
            paths = [
                fit_path(SampleMatrix(X_train.data[y_train == c] - means[j]), grid, scheme, cfg, threads=1)
                for j, c in enumerate(labels)
            ]
        rates = []
        for i, lam in enumerate(grid):
            factors = [path[i].L_hat for path in paths]
            model = _build(mode, labels, means, log_pi, factors, [lam] * len(labels))
            rates.append(misclassification_rate(y[val], predict(model, X.data[val], threads=1)))
        return np.array(rates)

    result = summarize(grid, run_folds(folds, task, threads))
    logger.info(
        "classifier_cv_completed",
        mode=mode.value,
        folds=k,
        best_lambda=result.best_lambda,
        best_error=float(result.mean_score[result.best_idx]),
    )
    return result


def fit_classifier(
    X: SampleLike,
    y,
    mode: Mode = Mode.LDA,
    lam: Optional[float] = None,
    grid: Optional[Sequence[float]] = None,
    k: int = DEFAULT_FOLDS,
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    seed: int = 0,
    criterion: str = 'likelihood',
    threads: Optional[int] = None,
    count: int = DEFAULT_COUNT,
    ratio: float = DEFAULT_RATIO
) -> ClassModel:
    """
    Fit class means, priors and penalized factors.

    Args:
        X: n x p training samples
        y: integer labels
        mode: LDA (shared factor) or QDA (per-class factors)
        lam: fixed penalty; selected by cross-validation when None
        grid: candidate lambdas for selection (built from the data when None)
        k: folds for selection
        scheme: group weights
        cfg: ADMM settings
        seed: fold seed
        criterion: 'likelihood' (validation Gaussian likelihood of each fitted
            factor) or 'misclassification' (validation error of the classifier)
        threads: worker cap
        count: grid length when the grid is built from the data
        ratio: smallest grid lambda relative to lambda_max

    Returns:
        ClassModel
    """
    X = as_samples(X)
    y = _check_labels(X, y)
    mode = Mode.parse(mode)
    cfg = cfg or SolverConfig()
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")

    labels, means, log_pi = _class_stats(X, y)
    if mode is Mode.LDA:
        blocks = [_centered(X, y, labels, means)]
    else:
        blocks = [SampleMatrix(X.data[y == c] - means[j]) for j, c in enumerate(labels)]

    if lam is not None:
        lambdas: List[float] = [float(lam)] * len(blocks)
    elif criterion == 'misclassification':
        if grid is None:
            grid = classifier_grid(X, y, mode, scheme, count, ratio)
        cv = cross_validate_classifier(X, y, grid, mode, k, scheme, cfg, seed, threads)
        lambdas = [cv.best_lambda] * len(blocks)
    else:
        lambdas = []
        for block in blocks:
            block_grid = grid
            if block_grid is None:
                top = lambda_max(sample_covariance(block), scheme)
                block_grid = np.geomspace(top, ratio * top, count) if top > 0 else [0.0]
            if len(block_grid) == 1:
                lambdas.append(float(block_grid[0]))
                continue
            cv = cross_validate(block, block_grid, min(k, block.n), scheme, cfg, seed, threads)
            lambdas.append(cv.best_lambda)

    factors = [fit(block, lambdas[j], scheme, cfg, threads).L_hat for j, block in enumerate(blocks)]
    model = _build(mode, labels, means, log_pi, factors, lambdas)
    logger.info(
        "classifier_fitted",
        mode=mode.value,
        n_classes=len(labels),
        p=X.p,
        lambdas=[float(v) for v in lambdas],
        criterion=criterion,
    )
    return model
