"""
Penalty evaluation and the proximal operator of the nested group penalty.

For a row of length r the penalty is
    P_r(b) = sum_{l=1}^{r-1} || (w_l1 b_1, ..., w_ll b_l) ||_2
and the proximal operator solves
    argmin_g  1/2 ||g - y||^2 + tau * P_r(g).
The last coordinate (the diagonal of L) is never penalized.
"""

from dataclasses import dataclass

import numpy as np

from src.penalty.kernels import (
    NEWTON_MAX_ITER,
    NEWTON_RTOL,
    PROX_MAX_SWEEPS,
    PROX_SWEEP_TOL,
    STATUS_NEWTON_FAILED,
    STATUS_OK,
    newton_root_kernel,
    prox_general_kernel,
    prox_unit_kernel,
)
from src.penalty.weights import WeightScheme, weight_table
from src.utils.exceptions import DimensionError, SolverError


@dataclass(frozen=True)
class ProxResult:
    """Output of one proximal step.

    gamma: minimizer, length r.
    nu: [nu_l]_+ for l = 1..r-1.
    zero_prefix: J = max{l : nu_l <= 0} (0 when every group is active);
        gamma_1..gamma_J are exactly zero.
    """

    gamma: np.ndarray
    nu: np.ndarray
    zero_prefix: int


def _as_vector(y) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise DimensionError(f"expected a non-empty vector, got shape {y.shape}")
    return y


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not tau > 0.0:
        raise DimensionError(f"tau must be positive, got {tau}")
    return tau


def _zero_prefix(nu: np.ndarray) -> int:
    inactive = np.flatnonzero(nu <= 0.0)
    return int(inactive[-1] + 1) if inactive.size else 0


def penalty_value(row, scheme: WeightScheme) -> float:
    """P_r(row); 0 for a single-entry row."""
    row = _as_vector(row)
    groups = row.size - 1
    if groups == 0:
        return 0.0
    table = weight_table(groups, WeightScheme.parse(scheme))
    weighted = table * row[:groups]
    return float(np.sum(np.sqrt(np.sum(weighted * weighted, axis=1))))


def prox_unit(y, tau: float) -> ProxResult:
    """Proximal operator for unit weights by sequential prefix soft-thresholding."""
    y = _as_vector(y)
    tau = _check_tau(tau)
    gamma, nu = prox_unit_kernel(y, tau)
    return ProxResult(gamma=gamma, nu=nu, zero_prefix=_zero_prefix(nu))


def prox_general(y, tau: float, scheme: WeightScheme, single_pass: bool = False) -> ProxResult:
    """
    Proximal operator for any weight scheme by cyclic dual BCD.

    single_pass stops after the forward sweep l = 1..r-1, which is exact for
    unit weights and yields the roots used by taper_formula.
    """
    y = _as_vector(y)
    tau = _check_tau(tau)
    groups = y.size - 1
    if groups == 0:
        return ProxResult(gamma=y.copy(), nu=np.zeros(0), zero_prefix=0)

    table = weight_table(groups, WeightScheme.parse(scheme))
    gamma, nu, status, group = prox_general_kernel(
        y, tau, table, NEWTON_MAX_ITER, NEWTON_RTOL, single_pass, PROX_MAX_SWEEPS, PROX_SWEEP_TOL
    )
    if status == STATUS_NEWTON_FAILED:
        raise SolverError(
            f"Newton root for group {group} did not converge in {NEWTON_MAX_ITER} iterations"
        )
    if status != STATUS_OK:
        raise SolverError(f"dual sweeps did not settle within {PROX_MAX_SWEEPS} passes")
    return ProxResult(gamma=gamma, nu=nu, zero_prefix=_zero_prefix(nu))


def prox(y, tau: float, scheme: WeightScheme) -> ProxResult:
    """Dispatch to the unit-weight fast path when it applies."""
    if WeightScheme.parse(scheme) is WeightScheme.UNIT:
        return prox_unit(y, tau)
    return prox_general(y, tau, scheme)


def newton_root(z, weights, tau: float) -> float:
    """
    nu > 0 with sum_m w_m^2 z_m^2 / (w_m^2 + nu)^2 = tau^2.

    Requires ||D^-1 z|| > tau, D = diag(weights), so that the root is positive.
    """
    z = _as_vector(z)
    weights = _as_vector(weights)
    tau = _check_tau(tau)
    if weights.size != z.size:
        raise DimensionError(
            f"weights length {weights.size} does not match group size {z.size}"
        )
    if np.any(weights <= 0):
        raise DimensionError("weights must be positive")
    if not np.linalg.norm(z / weights) > tau:
        raise DimensionError("||D^-1 z|| must exceed tau for a positive root")

    root, status = newton_root_kernel(z, weights, tau, NEWTON_MAX_ITER, NEWTON_RTOL)
    if status != STATUS_OK:
        raise SolverError(f"Newton root did not converge in {NEWTON_MAX_ITER} iterations")
    return float(root)


def taper_formula(y, tau: float, scheme: WeightScheme) -> np.ndarray:
    """
    Closed-form taper: gamma = y * g with
    g_m = prod_{l=m}^{r-1} nu_l / (w_lm^2 + nu_l) and g_r = 1,
    using the roots nu_l of the forward dual sweep. It agrees with the
    proximal operator for unit weights and with the single forward sweep
    for any scheme.
    """
    y = _as_vector(y)
    groups = y.size - 1
    if groups == 0:
        return y.copy()

    scheme = WeightScheme.parse(scheme)
    nu = prox_general(y, tau, scheme, single_pass=True).nu
    table = weight_table(groups, scheme)

    nu_col = nu[:, None]
    with np.errstate(invalid='ignore', divide='ignore'):
        ratios = nu_col / (table * table + nu_col)
    lower = np.tril(np.ones((groups, groups), dtype=bool))
    # entries above the diagonal are 0/0 and do not belong to any product
    ratios = np.where(lower, ratios, 1.0)

    taper = np.ones(y.size)
    taper[:groups] = np.prod(ratios, axis=0)
    return y * taper


def subgradient_residual(grad, beta, lam: float, scheme: WeightScheme) -> float:
    """
    Distance from zero to grad + lam * dP(beta), in the infinity norm.

    Groups that are nonzero at beta contribute their forced subgradient
    W * (W * beta) / ||W * beta||. The remaining freedom lives on the zero
    prefix beta_1..beta_J, where the best choice of unit-ball duals is itself
    a proximal problem: min ||v + lam sum W a|| = ||prox_lam(-v)||.
    """
    grad = _as_vector(grad)
    beta = _as_vector(beta)
    if grad.size != beta.size:
        raise DimensionError("gradient and point must have equal length")
    scheme = WeightScheme.parse(scheme)
    lam = float(lam)

    r = beta.size
    groups = r - 1
    nonzero = np.flatnonzero(beta[:groups])
    J = int(nonzero[0]) if nonzero.size else groups

    v = grad.copy()
    if lam > 0.0 and J < groups:
        table = weight_table(groups, scheme)
        for ell in range(J + 1, groups + 1):
            w = table[ell - 1, :ell]
            wb = w * beta[:ell]
            v[:ell] += lam * w * wb / np.linalg.norm(wb)

    tail = np.abs(v[J:])
    if J == 0:
        head = np.zeros(0)
    elif lam == 0.0:
        head = np.abs(v[:J])
    else:
        padded = np.append(-v[:J], 0.0)
        head = np.abs(prox(padded, lam, scheme).gamma[:J])

    return float(max(tail.max(initial=0.0), head.max(initial=0.0)))
