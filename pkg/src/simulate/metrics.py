"""
Estimation error of L_hat against the truth.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

from src.linalg.matrices import LowerTriangular, SymMatrix, tri_matmul_tt
from src.linalg.norms import kl_loss, norms
from src.utils.exceptions import DimensionError


@dataclass(frozen=True)
class ErrorReport:
    scaled_frob: float
    mat_inf: float
    spectral: float
    kl: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def error_report(
    L_hat: LowerTriangular,
    L_true: LowerTriangular,
    Omega_hat: Optional[SymMatrix] = None
) -> ErrorReport:
    """
    Scaled squared Frobenius, induced infinity and spectral norms of
    L_hat - L_true, plus the KL loss of Omega_hat (L_hat^T L_hat if omitted).
    """
    if L_hat.p != L_true.p:
        raise DimensionError(f"estimate has p={L_hat.p}, truth has p={L_true.p}")
    if Omega_hat is None:
        Omega_hat = tri_matmul_tt(L_hat)

    diff = L_hat.to_dense() - L_true.to_dense()
    d = norms(diff)
    return ErrorReport(
        scaled_frob=d.frobenius ** 2 / L_hat.p,
        mat_inf=d.induced_inf,
        spectral=d.spectral,
        kl=kl_loss(L_true, Omega_hat),
    )
