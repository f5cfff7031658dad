"""
Matrix norms and the Gaussian Kullback-Leibler loss.
"""

from typing import NamedTuple

import numpy as np
from scipy import linalg as sla

from src.linalg.matrices import LowerTriangular, MatrixLike, SymMatrix, as_array
from src.utils.exceptions import ConvergenceError, DimensionError, SolverError

SPECTRAL_RTOL = 1e-10
SPECTRAL_MAX_ITER = 10_000
SPECTRAL_SEED = 20_180_501


class MatrixNorms(NamedTuple):
    frobenius: float
    elementwise_inf: float
    induced_inf: float
    spectral: float


def spectral_norm(
    A: MatrixLike,
    rtol: float = SPECTRAL_RTOL,
    max_iter: int = SPECTRAL_MAX_ITER
) -> float:
    """
    Largest singular value by power iteration on A^T A.

    The start vector comes from a fixed-seed generator so repeated calls
    return identical values.
    """
    A = as_array(A)
    if not np.any(A):
        return 0.0

    AtA = A.T @ A
    rng = np.random.Generator(np.random.Philox(SPECTRAL_SEED))
    v = rng.standard_normal(AtA.shape[0])
    v /= np.linalg.norm(v)

    estimate = 0.0
    for _ in range(max_iter):
        w = AtA @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector in the null space; restart along the largest column
            v = AtA[:, np.argmax(np.linalg.norm(AtA, axis=0))].copy()
            v /= np.linalg.norm(v)
            continue
        v = w / norm_w
        rayleigh = float(v @ AtA @ v)
        if abs(rayleigh - estimate) <= rtol * rayleigh:
            return float(np.sqrt(rayleigh))
        estimate = rayleigh

    raise ConvergenceError(
        f"power iteration did not reach relative tolerance {rtol} in {max_iter} iterations"
    )


def norms(A: MatrixLike) -> MatrixNorms:
    """Frobenius, elementwise max, induced infinity and spectral norms."""
    A = as_array(A)
    abs_A = np.abs(A)
    return MatrixNorms(
        frobenius=float(np.sqrt(np.sum(A * A))),
        elementwise_inf=float(abs_A.max()) if A.size else 0.0,
        induced_inf=float(abs_A.sum(axis=1).max()) if A.size else 0.0,
        spectral=spectral_norm(A),
    )


def kl_loss(L_true: LowerTriangular, Omega_hat: SymMatrix) -> float:
    """
    Scaled Kullback-Leibler loss (1/p)[tr(Sigma Omega_hat) - log det(Sigma Omega_hat) - p].

    Sigma = L^{-1} L^{-T} is never formed: with Omega_hat = G G^T,
    tr(Sigma Omega_hat) = ||L^{-T} G||_F^2.
    """
    Omega = as_array(Omega_hat)
    p = L_true.p
    if Omega.shape != (p, p):
        raise DimensionError(f"Omega_hat shape {Omega.shape} does not match p={p}")

    try:
        G = sla.cholesky(Omega, lower=True, check_finite=True)
    except (sla.LinAlgError, ValueError) as exc:
        raise SolverError(f"Omega_hat is not positive definite: {exc}") from exc

    M = sla.solve_triangular(L_true.to_dense(), G, lower=True, trans='T')
    trace_term = float(np.sum(M * M))
    logdet_hat = 2.0 * float(np.sum(np.log(np.diag(G))))
    logdet_true = 2.0 * float(np.sum(np.log(L_true.diagonal())))

    return (trace_term - logdet_hat + logdet_true - p) / p
