"""
Full-matrix estimation of the inverse Cholesky factor.

The penalized likelihood decouples into p row problems sharing the Gram
matrix S = X^T X / n. Row 1 has the closed form 1/sqrt(S_11); rows 2..p are
solved by ADMM on worker threads. Each row is deterministic, so results do
not depend on dispatch order or worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.linalg.matrices import (
    LowerTriangular,
    SampleMatrix,
    SymMatrix,
    gram,
    tri_matmul_tt,
)
from src.penalty.prox import prox
from src.penalty.weights import WeightScheme
from src.rowsolver.admm import RowProblem, RowSolution, RowState, row_objective, solve_row
from src.rowsolver.config import SolverConfig
from src.utils.exceptions import DimensionError, SolverError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

LAMBDA_MAX_MARGIN = 1e-3
BISECTION_RTOL = 1e-10
BISECTION_MAX_ITER = 200

SampleLike = Union[SampleMatrix, np.ndarray]


@dataclass(frozen=True)
class FitResult:
    """Estimate at one lambda with per-row solver diagnostics."""

    L_hat: LowerTriangular
    lambda_: float
    bandwidths: np.ndarray
    converged_rows: int
    kkt_max: float
    iterations: int = 0
    scheme: WeightScheme = WeightScheme.QUADRATIC
    row_states: Tuple[Optional[RowState], ...] = field(default=(), repr=False, compare=False)

    @property
    def p(self) -> int:
        return self.L_hat.p

    @property
    def converged(self) -> bool:
        return self.converged_rows == max(self.p - 1, 0)

    def get_summary(self) -> Dict:
        return {
            'lambda': self.lambda_,
            'p': self.p,
            'converged_rows': self.converged_rows,
            'kkt_max': self.kkt_max,
            'iterations': self.iterations,
            'mean_bandwidth': float(np.mean(self.bandwidths)),
        }


def as_samples(X: SampleLike) -> SampleMatrix:
    return X if isinstance(X, SampleMatrix) else SampleMatrix(np.asarray(X))


def sample_covariance(X: SampleLike, center: bool = False) -> SymMatrix:
    """S = X^T X / n, after optional column centering; rejects zero-variance columns."""
    X = as_samples(X)
    if X.n < 2:
        raise DimensionError(f"need at least 2 samples, got n={X.n}")
    if center:
        X = X.centered()
    S = gram(X, X.p)
    zero = np.flatnonzero(np.diag(S.data) <= 0)
    if zero.size:
        raise DimensionError(f"column {int(zero[0]) + 1} has zero sample variance")
    return S


def _row_problem(S: SymMatrix, r: int, lam: float, scheme: WeightScheme) -> RowProblem:
    return RowProblem(r=r, S_r=S.principal(r), lam=lam, scheme=scheme)


def _solve_tagged(
    prob: RowProblem,
    cfg: SolverConfig,
    warm_start: Optional[RowState]
) -> RowSolution:
    try:
        return solve_row(prob, cfg, warm_start)
    except SolverError as exc:
        if exc.row is not None:
            raise
        raise SolverError(str(exc), row=prob.r) from exc


def _dispatch(task: Callable[[int], object], p: int, threads: Optional[int]) -> Dict[int, object]:
    """Run task(r) for r = p..2, largest rows first, results keyed by r."""
    rows = list(range(p, 1, -1))
    if threads == 1 or len(rows) <= 1:
        return {r: task(r) for r in rows}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {r: pool.submit(task, r) for r in rows}
        return {r: future.result() for r, future in futures.items()}


def _assemble(
    S: SymMatrix,
    lam: float,
    scheme: WeightScheme,
    solutions: Sequence[RowSolution]
) -> FitResult:
    rows = [np.array([1.0 / np.sqrt(S.data[0, 0])])]
    rows.extend(solution.row for solution in solutions)
    L_hat = LowerTriangular.from_rows(rows)
    return FitResult(
        L_hat=L_hat,
        lambda_=float(lam),
        bandwidths=L_hat.bandwidths(),
        converged_rows=sum(1 for s in solutions if s.converged),
        kkt_max=max((s.kkt_residual for s in solutions), default=0.0),
        iterations=sum(s.iterations for s in solutions),
        scheme=scheme,
        row_states=(None,) + tuple(s.state for s in solutions),
    )


def _log_fit(fit: FitResult, solutions: Sequence[RowSolution]):
    for r, solution in enumerate(solutions, start=2):
        if not solution.converged:
            logger.warning(
                "row_not_converged",
                row=r,
                lambda_=fit.lambda_,
                iterations=solution.iterations,
                kkt_residual=solution.kkt_residual,
            )
    logger.debug("fit_completed", **fit.get_summary())


def fit_gram(
    S: SymMatrix,
    lam: float,
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    threads: Optional[int] = None,
    warm_start: Optional[FitResult] = None
) -> FitResult:
    """Estimate from a precomputed Gram matrix."""
    cfg = cfg or SolverConfig()
    scheme = WeightScheme.parse(scheme)
    if not lam >= 0:
        raise DimensionError(f"lambda must be non-negative, got {lam}")
    if warm_start is not None and warm_start.p != S.p:
        raise DimensionError(f"warm start has p={warm_start.p}, expected {S.p}")

    def task(r: int) -> RowSolution:
        state = warm_start.row_states[r - 1] if warm_start is not None else None
        return _solve_tagged(_row_problem(S, r, lam, scheme), cfg, state)

    solved = _dispatch(task, S.p, threads)
    solutions = [solved[r] for r in range(2, S.p + 1)]
    result = _assemble(S, lam, scheme, solutions)
    _log_fit(result, solutions)
    return result


def fit(
    X: SampleLike,
    lam: float,
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    threads: Optional[int] = None,
    center: bool = False
) -> FitResult:
    """
    Penalized maximum likelihood estimate of L at a single lambda.

    Args:
        X: n x p samples, assumed mean zero unless center is set
        lam: penalty level
        scheme: group weights
        cfg: ADMM settings
        threads: worker cap (None lets the executor decide, 1 runs inline)
        center: subtract column means first

    Returns:
        FitResult with the estimate and solver diagnostics
    """
    S = sample_covariance(X, center=center)
    logger.info("fit_started", p=S.p, lambda_=float(lam), scheme=WeightScheme.parse(scheme).value)
    return fit_gram(S, lam, scheme, cfg, threads)


def fit_path(
    X: SampleLike,
    lambdas: Sequence[float],
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    cfg: Optional[SolverConfig] = None,
    threads: Optional[int] = None,
    center: bool = False,
    S: Optional[SymMatrix] = None
) -> List[FitResult]:
    """
    Estimates along a non-increasing lambda path.

    Each worker owns one row and walks the whole path, warm-starting every
    lambda from the previous solution of that row.
    """
    cfg = cfg or SolverConfig()
    scheme = WeightScheme.parse(scheme)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if lambdas.ndim != 1 or lambdas.size == 0:
        raise DimensionError("lambda path must be a non-empty vector")
    if np.any(lambdas < 0) or np.any(np.diff(lambdas) > 0):
        raise DimensionError("lambda path must be non-negative and non-increasing")
    if S is None:
        S = sample_covariance(X, center=center)

    def task(r: int) -> List[RowSolution]:
        S_r = S.principal(r)
        state = None
        path = []
        for lam in lambdas:
            prob = RowProblem(r=r, S_r=S_r, lam=float(lam), scheme=scheme)
            solution = _solve_tagged(prob, cfg, state)
            state = solution.state
            path.append(solution)
        return path

    solved = _dispatch(task, S.p, threads)
    fits = []
    for k, lam in enumerate(lambdas):
        solutions = [solved[r][k] for r in range(2, S.p + 1)]
        result = _assemble(S, lam, scheme, solutions)
        _log_fit(result, solutions)
        fits.append(result)

    logger.info(
        "path_completed",
        p=S.p,
        n_lambdas=int(lambdas.size),
        converged=all(f.converged for f in fits),
    )
    return fits


def _row_is_diagonal(g: np.ndarray, lam: float, scheme: WeightScheme) -> bool:
    # the diagonal point is optimal iff prox_lam(-g) vanishes on the off-diagonal part
    return prox(np.append(-g, 0.0), lam, scheme).zero_prefix == g.size


def row_lambda_max(S: SymMatrix, r: int, scheme: WeightScheme) -> float:
    """Smallest lambda at which row r of the estimate is diagonal."""
    data = S.data
    g = 2.0 * data[:r - 1, r - 1] / np.sqrt(data[r - 1, r - 1])
    if not np.any(g):
        return 0.0

    lo, hi = 0.0, float(np.linalg.norm(g))
    while not _row_is_diagonal(g, hi, scheme):
        lo, hi = hi, 2.0 * hi

    for _ in range(BISECTION_MAX_ITER):
        if hi - lo <= BISECTION_RTOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if _row_is_diagonal(g, mid, scheme):
            hi = mid
        else:
            lo = mid
    return hi


def lambda_max(
    S: Union[SymMatrix, SampleLike],
    scheme: WeightScheme = WeightScheme.QUADRATIC,
    margin: float = LAMBDA_MAX_MARGIN
) -> float:
    """
    Smallest lambda with an all-diagonal estimate, inflated by a relative margin.

    Accepts a Gram matrix or a sample matrix.
    """
    if not isinstance(S, SymMatrix):
        S = sample_covariance(S)
    scheme = WeightScheme.parse(scheme)
    per_row = [row_lambda_max(S, r, scheme) for r in range(2, S.p + 1)]
    value = max(per_row, default=0.0) * (1.0 + margin)
    logger.debug("lambda_max_found", p=S.p, lambda_max=value, scheme=scheme.value)
    return value


def objective(
    L: LowerTriangular,
    X_or_S: Union[SymMatrix, SampleLike],
    lam: float,
    scheme: WeightScheme = WeightScheme.QUADRATIC
) -> float:
    """-2 sum log L_rr + (1/n) sum ||L x_i||^2 + lam * sum_r P_r(L_r)."""
    S = X_or_S if isinstance(X_or_S, SymMatrix) else sample_covariance(X_or_S)
    if S.p != L.p:
        raise DimensionError(f"estimate has p={L.p}, data has p={S.p}")
    scheme = WeightScheme.parse(scheme)
    return float(sum(
        row_objective(L.row(r), S.principal(r), lam, scheme)
        for r in range(1, L.p + 1)
    ))


def diagonal_fit(X: SampleLike, center: bool = False) -> FitResult:
    """Closed-form diagonal estimate L_rr = 1/sqrt(S_rr)."""
    S = sample_covariance(X, center=center)
    L_hat = LowerTriangular.from_dense(np.diag(1.0 / np.sqrt(np.diag(S.data))))
    return FitResult(
        L_hat=L_hat,
        lambda_=float('inf'),
        bandwidths=np.zeros(S.p, dtype=np.int64),
        converged_rows=S.p - 1,
        kkt_max=0.0,
    )


def omega(fit_or_L: Union[FitResult, LowerTriangular]) -> SymMatrix:
    """Precision estimate L^T L."""
    L = fit_or_L.L_hat if isinstance(fit_or_L, FitResult) else fit_or_L
    return tri_matmul_tt(L)
