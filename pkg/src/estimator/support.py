"""
Support recovery against a known truth.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Union

import numpy as np

from src.estimator.fit import FitResult
from src.linalg.matrices import LowerTriangular
from src.utils.exceptions import DimensionError

SUPPORT_THRESHOLD = 1e-10


@dataclass(frozen=True)
class SupportReport:
    """Counts over strictly-lower-triangular positions."""

    sensitivity: float
    specificity: float
    signed_exact: bool
    true_positives: int
    true_negatives: int
    false_positives: int
    false_negatives: int

    def to_dict(self) -> Dict:
        return asdict(self)


def _strict_lower(L: LowerTriangular) -> np.ndarray:
    rows, cols = np.tril_indices(L.p, k=-1)
    return L.to_dense()[rows, cols]


def sign_support(
    fit: Union[FitResult, LowerTriangular],
    L_true: LowerTriangular,
    threshold: float = SUPPORT_THRESHOLD
) -> SupportReport:
    """
    Sensitivity, specificity and exact signed recovery of the estimate.

    Estimated entries with |value| <= threshold count as zero. A rate whose
    denominator is empty is reported as 1.
    """
    L_hat = fit.L_hat if isinstance(fit, FitResult) else fit
    if L_hat.p != L_true.p:
        raise DimensionError(f"estimate has p={L_hat.p}, truth has p={L_true.p}")

    est = _strict_lower(L_hat)
    est = np.where(np.abs(est) > threshold, est, 0.0)
    truth = _strict_lower(L_true)

    est_nz = est != 0
    true_nz = truth != 0
    tp = int(np.sum(est_nz & true_nz))
    tn = int(np.sum(~est_nz & ~true_nz))
    fp = int(np.sum(est_nz & ~true_nz))
    fn = int(np.sum(~est_nz & true_nz))

    return SupportReport(
        sensitivity=tp / (tp + fn) if tp + fn else 1.0,
        specificity=tn / (tn + fp) if tn + fp else 1.0,
        signed_exact=bool(np.array_equal(np.sign(est), np.sign(truth))),
        true_positives=tp,
        true_negatives=tn,
        false_positives=fp,
        false_negatives=fn,
    )
