"""
Tests for weight tables, the proximal operator and its closed forms.
"""

import numpy as np
import pytest

from src.penalty.prox import (
    newton_root,
    penalty_value,
    prox,
    prox_general,
    prox_unit,
    subgradient_residual,
    taper_formula,
)
from src.penalty.weights import WeightScheme, weight_table
from src.utils.exceptions import DimensionError

SCHEMES = [WeightScheme.QUADRATIC, WeightScheme.UNIT]


def random_instance(rng):
    r = int(rng.integers(2, 9))
    y = rng.standard_normal(r) * rng.uniform(0.2, 3.0)
    tau = rng.uniform(0.05, 2.0)
    return y, tau


def prox_objective(g, y, tau, scheme):
    return 0.5 * float(np.sum((g - y) ** 2)) + tau * penalty_value(g, scheme)


def test_weight_table_values():
    table = weight_table(3, WeightScheme.QUADRATIC)
    expected = np.array([
        [1.0, 0.0, 0.0],
        [1 / 4, 1.0, 0.0],
        [1 / 9, 1 / 4, 1.0],
    ])
    assert np.allclose(table, expected)
    assert np.array_equal(weight_table(3, WeightScheme.UNIT), np.tril(np.ones((3, 3))))
    assert not table.flags.writeable


def test_scheme_parse():
    assert WeightScheme.parse("Unit") is WeightScheme.UNIT
    with pytest.raises(ValueError):
        WeightScheme.parse("cubic")


def test_penalty_value_by_hand():
    row = np.array([3.0, 4.0, 7.0])
    # groups {1} and {1, 2}; the last entry is unpenalized
    assert penalty_value(row, WeightScheme.UNIT) == pytest.approx(3.0 + 5.0)
    assert penalty_value(row, WeightScheme.QUADRATIC) == pytest.approx(3.0 + np.hypot(0.75, 4.0))
    assert penalty_value([2.0], WeightScheme.UNIT) == 0.0


@pytest.mark.parametrize("scheme", SCHEMES)
def test_prox_large_tau_zeroes_everything_but_diagonal(scheme):
    y = np.array([0.01, -0.01, 0.01, 5.0])
    result = prox(y, 1.0, scheme)
    assert np.array_equal(result.gamma, [0.0, 0.0, 0.0, 5.0])
    assert result.zero_prefix == 3


@pytest.mark.parametrize("scheme", SCHEMES)
def test_prox_small_tau_is_near_identity(scheme, rng):
    y = rng.standard_normal(6) + 3.0
    result = prox(y, 1e-9, scheme)
    assert np.allclose(result.gamma, y, atol=1e-7)
    assert result.zero_prefix == 0


def test_prox_single_entry_is_identity():
    result = prox_general(np.array([2.5]), 1.0, WeightScheme.QUADRATIC)
    assert np.array_equal(result.gamma, [2.5])


def test_prox_rejects_nonpositive_tau():
    with pytest.raises(DimensionError):
        prox_unit(np.ones(3), 0.0)


def test_taper_formula_matches_forward_sweep(rng):
    for _ in range(10_000):
        y, tau = random_instance(rng)
        for scheme in SCHEMES:
            forward = prox_general(y, tau, scheme, single_pass=True)
            tapered = taper_formula(y, tau, scheme)
            assert np.max(np.abs(forward.gamma - tapered)) <= 1e-10
            J = forward.zero_prefix
            assert np.all(forward.gamma[:J] == 0.0)


def test_taper_formula_is_exact_for_unit_weights(rng):
    for _ in range(1000):
        y, tau = random_instance(rng)
        exact = prox(y, tau, WeightScheme.UNIT).gamma
        assert np.max(np.abs(exact - taper_formula(y, tau, WeightScheme.UNIT))) <= 1e-10


def test_unit_fast_path_matches_general(rng):
    for _ in range(1000):
        y, tau = random_instance(rng)
        fast = prox_unit(y, tau)
        general = prox_general(y, tau, WeightScheme.UNIT)
        assert np.max(np.abs(fast.gamma - general.gamma)) <= 1e-10
        assert fast.zero_prefix == general.zero_prefix


def test_zero_pattern_is_prefix(rng):
    for _ in range(10_000):
        y, tau = random_instance(rng)
        gamma = prox(y, tau, WeightScheme.QUADRATIC).gamma
        zeros = np.flatnonzero(gamma[:-1] == 0.0)
        if zeros.size:
            assert np.array_equal(zeros, np.arange(zeros[-1] + 1))


@pytest.mark.parametrize("scheme", SCHEMES)
def test_prox_satisfies_optimality(scheme, rng):
    for _ in range(1000):
        y, tau = random_instance(rng)
        gamma = prox(y, tau, scheme).gamma
        assert subgradient_residual(gamma - y, gamma, tau, scheme) <= 1e-8


def test_prox_beats_perturbations(rng):
    for _ in range(100):
        y, tau = random_instance(rng)
        for scheme in SCHEMES:
            gamma = prox(y, tau, scheme).gamma
            best = prox_objective(gamma, y, tau, scheme)
            for _ in range(5):
                trial = gamma + 1e-3 * rng.standard_normal(gamma.size)
                assert prox_objective(trial, y, tau, scheme) >= best - 1e-12


def test_prox_matches_convex_solver(rng):
    cp = pytest.importorskip("cvxpy")
    for _ in range(30):
        y, tau = random_instance(rng)
        r = y.size
        for scheme in SCHEMES:
            table = weight_table(r - 1, scheme)
            g = cp.Variable(r)
            penalty = sum(
                cp.norm(cp.multiply(table[ell - 1, :ell], g[:ell]), 2)
                for ell in range(1, r)
            )
            problem = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(g - y) + tau * penalty))
            problem.solve()
            reference = prox_objective(g.value, y, tau, scheme)
            ours = prox_objective(prox(y, tau, scheme).gamma, y, tau, scheme)
            assert ours <= reference + 1e-6 * max(1.0, abs(reference))


QUADRATIC_HARD_CASE = (
    np.array([-0.0957, -1.4276, 2.0305, 3.0983, 0.0966, -0.6933, 2.2752, -0.1315]),
    1.5459,
)


def test_quadratic_prox_improves_on_forward_sweep():
    y, tau = QUADRATIC_HARD_CASE
    scheme = WeightScheme.QUADRATIC
    gamma = prox(y, tau, scheme).gamma
    forward = prox_general(y, tau, scheme, single_pass=True).gamma

    assert subgradient_residual(gamma - y, gamma, tau, scheme) <= 1e-8
    assert subgradient_residual(forward - y, forward, tau, scheme) > 1e-4
    assert prox_objective(gamma, y, tau, scheme) < prox_objective(forward, y, tau, scheme) - 1e-5


def test_quadratic_prox_matches_convex_solver_on_fixed_draws():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(20240611)
    instances = [QUADRATIC_HARD_CASE] + [random_instance(rng) for _ in range(40)]
    for y, tau in instances:
        r = y.size
        table = weight_table(r - 1, WeightScheme.QUADRATIC)
        g = cp.Variable(r)
        penalty = sum(
            cp.norm(cp.multiply(table[ell - 1, :ell], g[:ell]), 2)
            for ell in range(1, r)
        )
        cp.Problem(cp.Minimize(0.5 * cp.sum_squares(g - y) + tau * penalty)).solve()
        reference = prox_objective(g.value, y, tau, WeightScheme.QUADRATIC)
        ours = prox_objective(prox(y, tau, WeightScheme.QUADRATIC).gamma, y, tau, WeightScheme.QUADRATIC)
        assert ours <= reference + 1e-6 * max(1.0, abs(reference))


def test_newton_root_solves_equation(rng):
    z = rng.standard_normal(4) + 2.0
    w = np.array([1 / 16, 1 / 9, 1 / 4, 1.0])
    tau = 0.5
    nu = newton_root(z, w, tau)
    h = np.sum(w ** 2 * z ** 2 / (w ** 2 + nu) ** 2)
    assert nu > 0
    assert h == pytest.approx(tau ** 2, rel=1e-10)


def test_newton_root_requires_active_group():
    with pytest.raises(DimensionError):
        newton_root(np.array([0.01]), np.array([1.0]), 1.0)


def test_subgradient_residual_zero_at_zero_for_small_gradient():
    grad = np.array([0.1, -0.1, 0.0])
    beta = np.array([0.0, 0.0, 1.0])
    assert subgradient_residual(grad, beta, 10.0, WeightScheme.QUADRATIC) == 0.0
    assert subgradient_residual(grad, beta, 0.0, WeightScheme.QUADRATIC) == pytest.approx(0.1)
