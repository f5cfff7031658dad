"""
ADMM for one row of the inverse Cholesky factor.

Row r solves
    min_{b: b_r > 0}  -2 log b_r + b^T S^(r) b + lambda * P_r(b)
by splitting b = g: a closed-form b-update, a proximal g-update and a dual
update. The dual u is kept in scaled form (unscaled dual = rho * u), so a
change of rho rescales u.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import linalg as sla

from src.linalg.matrices import SymMatrix
from src.penalty.prox import penalty_value, prox, subgradient_residual
from src.penalty.weights import WeightScheme
from src.rowsolver.config import SolverConfig
from src.utils.exceptions import DimensionError, SolverError


@dataclass(frozen=True)
class RowProblem:
    """Row r subproblem on the leading r x r Gram block."""

    r: int
    S_r: SymMatrix
    lam: float
    scheme: WeightScheme = WeightScheme.QUADRATIC

    def __post_init__(self):
        if self.r < 2:
            raise DimensionError(f"row problems start at r=2, got r={self.r}")
        if self.S_r.p != self.r:
            raise DimensionError(f"Gram block is {self.S_r.p}x{self.S_r.p}, expected {self.r}x{self.r}")
        if not self.lam >= 0:
            raise DimensionError(f"lambda must be non-negative, got {self.lam}")
        if not self.S_r.data[-1, -1] > 0:
            raise DimensionError(f"variable {self.r} has zero sample variance")
        object.__setattr__(self, 'scheme', WeightScheme.parse(self.scheme))


@dataclass
class RowState:
    """ADMM iterate; u is the scaled dual."""

    beta: np.ndarray
    gamma: np.ndarray
    u: np.ndarray
    rho: float
    primal_res: float = np.inf
    dual_res: float = np.inf
    iter: int = 0

    @classmethod
    def initial(cls, r: int, rho: float = 1.0) -> "RowState":
        e_r = np.zeros(r)
        e_r[-1] = 1.0
        return cls(beta=e_r.copy(), gamma=e_r.copy(), u=np.zeros(r), rho=float(rho))

    def copy(self) -> "RowState":
        return replace(
            self,
            beta=self.beta.copy(),
            gamma=self.gamma.copy(),
            u=self.u.copy(),
            iter=0,
        )


@dataclass(frozen=True)
class RowSolution:
    """Converged (or best available) row with diagnostics."""

    row: np.ndarray
    iterations: int
    converged: bool
    kkt_residual: float
    objective: float
    state: RowState

    @property
    def bandwidth(self) -> int:
        off = np.flatnonzero(self.row[:-1])
        return 0 if off.size == 0 else int(self.row.size - 1 - off[0])


class BetaSystem:
    """
    Factorization of 2 S_{-r,-r} + rho I, refreshed only when rho changes.
    """

    def __init__(self, S_r: SymMatrix):
        S = S_r.data
        self.S_off = S[-1, :-1]
        self.S_rr = float(S[-1, -1])
        self._S_head = S[:-1, :-1]
        self._rho: Optional[float] = None
        self._factor = None
        self._c = None
        self._A = None

    def at(self, rho: float):
        """Return (cho_factor, c = M^-1 S_{-r,r}, A) for the current rho."""
        if rho != self._rho:
            M = 2.0 * self._S_head + rho * np.eye(self._S_head.shape[0])
            self._factor = sla.cho_factor(M, lower=True, check_finite=False)
            self._c = sla.cho_solve(self._factor, self.S_off, check_finite=False)
            self._A = 4.0 * float(self.S_off @ self._c) - 2.0 * self.S_rr - rho
            self._rho = rho
        return self._factor, self._c, self._A


def beta_update(
    state: RowState,
    prob: RowProblem,
    system: Optional[BetaSystem] = None
) -> np.ndarray:
    """
    Closed-form minimizer of the augmented Lagrangian in beta.

    beta_r is the positive root of A b^2 + B b + 2 = 0 (A < 0), and
    beta_{-r} = -(2 S_{-r,-r} + rho I)^-1 (2 S_{-r,r} beta_r + u_{-r} - rho gamma_{-r})
    with u the unscaled dual.
    """
    if not state.rho > 0:
        raise SolverError(f"rho must be positive, got {state.rho}", row=prob.r)
    system = system or BetaSystem(prob.S_r)
    factor, c, A = system.at(state.rho)
    if not A < 0:
        raise SolverError(f"beta-update coefficient A={A} is not negative", row=prob.r)

    rho = state.rho
    dual = rho * state.u
    q = dual[:-1] - rho * state.gamma[:-1]
    M_inv_q = sla.cho_solve(factor, q, check_finite=False)
    B = 2.0 * float(system.S_off @ M_inv_q) - dual[-1] + rho * state.gamma[-1]

    root = np.sqrt(B * B - 8.0 * A)
    # pick the cancellation-free form of the positive root
    if B <= 0:
        beta_r = 4.0 / (root - B)
    else:
        beta_r = (-B - root) / (2.0 * A)
    assert beta_r > 0, "beta_r must stay positive"

    beta = np.empty(prob.r)
    beta[:-1] = -2.0 * c * beta_r - M_inv_q
    beta[-1] = beta_r
    return beta


def rho_update(
    state: RowState,
    balance: float = 10.0,
    scale: float = 2.0
) -> RowState:
    """Residual balancing: grow rho when the primal residual dominates, shrink it otherwise."""
    if state.primal_res > balance * state.dual_res:
        return replace(state, rho=state.rho * scale, u=state.u / scale)
    if state.dual_res > balance * state.primal_res:
        return replace(state, rho=state.rho / scale, u=state.u * scale)
    return state


def row_objective(beta, S_r: SymMatrix, lam: float, scheme: WeightScheme) -> float:
    """-2 log b_r + b^T S b + lambda P_r(b); +inf when b_r <= 0."""
    beta = np.asarray(beta, dtype=np.float64)
    if not beta[-1] > 0:
        return np.inf
    quad = float(beta @ S_r.data @ beta)
    return -2.0 * np.log(beta[-1]) + quad + lam * penalty_value(beta, scheme)


def row_kkt_residual(row, prob: RowProblem) -> float:
    """Infinity-norm distance from zero to the subdifferential of the row objective."""
    row = np.asarray(row, dtype=np.float64)
    grad = 2.0 * (prob.S_r.data @ row)
    grad[-1] -= 2.0 / row[-1]
    return subgradient_residual(grad, row, prob.lam, prob.scheme)


def _truncate_leading(row: np.ndarray, threshold: float) -> np.ndarray:
    """Zero the leading run of off-diagonal entries below threshold."""
    row = row.copy()
    big = np.flatnonzero(np.abs(row[:-1]) >= threshold)
    cut = big[0] if big.size else row.size - 1
    row[:cut] = 0.0
    return row


def solve_row(
    prob: RowProblem,
    cfg: Optional[SolverConfig] = None,
    warm_start: Optional[RowState] = None
) -> RowSolution:
    """
    Run ADMM until the primal residual ||beta - gamma|| and the dual residual
    rho * ||gamma - gamma_prev|| meet their tolerances, or max_iter is reached.

    eps_primal = eps_abs * sqrt(r) + eps_rel * max(||beta||, ||gamma||)
    eps_dual = eps_abs * sqrt(r) + eps_rel * rho * ||u||

    u is the scaled dual, so rho * u is the unscaled multiplier and both
    residuals are measured in unscaled units.

    The sparse iterate gamma is returned. Without convergence the returned
    row is the best objective seen at a rho checkpoint.
    """
    cfg = cfg or SolverConfig()
    r = prob.r
    state = warm_start.copy() if warm_start is not None else RowState.initial(r, cfg.rho_init)
    if state.beta.size != r:
        raise DimensionError(f"warm start has length {state.beta.size}, expected {r}")

    system = BetaSystem(prob.S_r)
    sqrt_r = np.sqrt(r)
    converged = False
    best_row, best_obj = None, np.inf

    for it in range(1, cfg.max_iter + 1):
        beta = beta_update(state, prob, system)
        y = beta + state.u
        if prob.lam > 0:
            gamma = prox(y, prob.lam / state.rho, prob.scheme).gamma
        else:
            gamma = y
        u = state.u + beta - gamma

        primal = float(np.linalg.norm(beta - gamma))
        dual = state.rho * float(np.linalg.norm(gamma - state.gamma))
        eps_primal = cfg.eps_abs * sqrt_r + cfg.eps_rel * max(
            np.linalg.norm(beta), np.linalg.norm(gamma)
        )
        eps_dual = cfg.eps_abs * sqrt_r + cfg.eps_rel * state.rho * float(np.linalg.norm(u))

        state.beta, state.gamma, state.u = beta, gamma, u
        state.primal_res, state.dual_res, state.iter = primal, dual, it

        if primal <= eps_primal and dual <= eps_dual and gamma[-1] > 0:
            converged = True
            break

        if it % cfg.rho_check_period == 0:
            if gamma[-1] > 0:
                objective = row_objective(gamma, prob.S_r, prob.lam, prob.scheme)
                if objective < best_obj:
                    best_row, best_obj = gamma.copy(), objective
            state = rho_update(state, cfg.rho_balance, cfg.rho_scale)

    if converged or best_row is None:
        row = state.gamma
        if not row[-1] > 0:
            row = state.beta.copy()
    else:
        row = best_row

    row = _truncate_leading(row, cfg.support_threshold)
    return RowSolution(
        row=row,
        iterations=state.iter,
        converged=converged,
        kkt_residual=row_kkt_residual(row, prob),
        objective=row_objective(row, prob.S_r, prob.lam, prob.scheme),
        state=state,
    )
