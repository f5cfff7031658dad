"""
Compiled kernels for the hierarchical group lasso proximal operator.

Every sweep runs l = 1..r-1 in order and leaves the last (diagonal)
coordinate untouched. Failures are reported through integer status codes
because exceptions with runtime messages cannot cross the njit boundary.
"""

import numba as nb
import numpy as np

NEWTON_MAX_ITER = 200
NEWTON_RTOL = 1e-12
MACHINE_EPS = float(np.finfo(np.float64).eps)

PROX_MAX_SWEEPS = 1000
PROX_SWEEP_TOL = 1e-14

STATUS_OK = 0
STATUS_NEWTON_FAILED = 1
STATUS_SWEEPS_EXHAUSTED = 2


@nb.njit(nogil=True)
def newton_root_kernel(z, w, tau, max_iter, rtol):
    """
    Root of h(nu) = sum_m w_m^2 z_m^2 / (w_m^2 + nu)^2 = tau^2.

    Newton runs on 1/h(nu) = tau^-2 inside the bracket
    [max(0, ||Dz||/tau - w_l^2), ||Dz||/tau]; a step leaving the bracket is
    replaced by bisection. Returns (nu, status).
    """
    ell = z.shape[0]
    dz = 0.0
    for m in range(ell):
        dz += (w[m] * z[m]) ** 2
    dz = np.sqrt(dz)

    tau2 = tau * tau
    hi = dz / tau
    lo = hi - w[ell - 1] * w[ell - 1]
    if lo < 0.0:
        lo = 0.0
    target = 1.0 / tau2

    nu = hi
    for _ in range(max_iter):
        h = 0.0
        dh = 0.0
        for m in range(ell):
            w2 = w[m] * w[m]
            a = w2 + nu
            q = w2 * z[m] * z[m] / (a * a)
            h += q
            dh -= 2.0 * q / a
        if abs(h - tau2) <= rtol * tau2:
            # one more step settles the root to rounding level
            slope = -dh / (h * h)
            if slope > 0.0:
                polished = nu - (1.0 / h - target) / slope
                if lo <= polished <= hi:
                    nu = polished
            return nu, STATUS_OK
        # 1/h is increasing in nu
        if h < tau2:
            hi = nu
        else:
            lo = nu
        if hi - lo <= 4.0 * MACHINE_EPS * hi:
            return nu, STATUS_OK
        f = 1.0 / h - target
        slope = -dh / (h * h)
        step = nu - f / slope if slope > 0.0 else -1.0
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        nu = step
    return nu, STATUS_NEWTON_FAILED


@nb.njit(nogil=True)
def prox_unit_kernel(y, tau):
    """
    Sequential group soft-thresholding for unit weights.

    Step l scales the current prefix 1..l by c_l = (1 - tau/||prefix||)_+,
    so the result is y_m times the product of c_l over l >= m. Returns
    (gamma, nu) with nu_l = [||prefix||/tau - 1]_+, i.e. c_l = nu_l/(1+nu_l).
    """
    r = y.shape[0]
    gamma = y.copy()
    nu = np.zeros(max(r - 1, 0))
    factors = np.ones(max(r - 1, 0))

    prefix_sq = 0.0
    for ell in range(1, r):
        norm_sq = prefix_sq + y[ell - 1] * y[ell - 1]
        norm = np.sqrt(norm_sq)
        if norm <= tau:
            factors[ell - 1] = 0.0
            nu[ell - 1] = 0.0
            prefix_sq = 0.0
        else:
            c = 1.0 - tau / norm
            factors[ell - 1] = c
            nu[ell - 1] = norm / tau - 1.0
            prefix_sq = c * c * norm_sq

    running = 1.0
    for m in range(r - 2, -1, -1):
        running *= factors[m]
        gamma[m] = y[m] * running
    return gamma, nu


@nb.njit(nogil=True)
def prox_general_kernel(y, tau, table, max_iter, rtol, single_pass, max_sweeps, tol):
    """
    Cyclic block coordinate descent on the dual, one block per group.

    contrib[l] holds tau * W^(l) * a^(l), so z = y - sum_l contrib[l] is the
    primal point. Updating block l adds its contribution back to get z_l;
    the block is slack (contribution z_l, prefix zeroed) when
    ||D^-1 z_l|| <= tau; otherwise nu_l solves h_l(nu) = tau^2 and the
    contribution is w_lm^2 z_lm / (w_lm^2 + nu_l).

    The first sweep is the forward pass whose roots drive the taper formula.
    It is exact for unit weights only; otherwise sweeps repeat until no
    contribution moves by more than tol * max(1, ||y||_inf), and the prefix
    of the last slack group is set to exactly zero.

    Returns (gamma, nu, status, group) where group is the failing block when
    status is nonzero.
    """
    r = y.shape[0]
    groups = max(r - 1, 0)
    z = y.copy()
    nu = np.zeros(groups)
    contrib = np.zeros((groups, groups))
    z_block = np.zeros(groups)

    scale = 1.0
    for m in range(r):
        scale = max(scale, abs(y[m]))
    threshold = tol * scale

    for _ in range(max_sweeps):
        change = 0.0
        last_slack = 0
        for ell in range(1, r):
            slack_sq = 0.0
            for m in range(ell):
                z_block[m] = z[m] + contrib[ell - 1, m]
                slack_sq += (z_block[m] / table[ell - 1, m]) ** 2

            if np.sqrt(slack_sq) <= tau:
                for m in range(ell):
                    change = max(change, abs(z_block[m] - contrib[ell - 1, m]))
                    contrib[ell - 1, m] = z_block[m]
                    z[m] = 0.0
                nu[ell - 1] = 0.0
                last_slack = ell
                continue

            root, status = newton_root_kernel(
                z_block[:ell], table[ell - 1, :ell], tau, max_iter, rtol
            )
            if status != STATUS_OK:
                return z, nu, status, ell
            for m in range(ell):
                w2 = table[ell - 1, m] * table[ell - 1, m]
                block = w2 * z_block[m] / (w2 + root)
                change = max(change, abs(block - contrib[ell - 1, m]))
                contrib[ell - 1, m] = block
                z[m] = z_block[m] - block
            nu[ell - 1] = root

        if single_pass or change <= threshold:
            for m in range(last_slack):
                z[m] = 0.0
            return z, nu, STATUS_OK, 0

    return z, nu, STATUS_SWEEPS_EXHAUSTED, 0
