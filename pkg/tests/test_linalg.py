"""
Tests for matrix containers, norms and the KL loss.
"""

import numpy as np
import pytest

from src.linalg.matrices import (
    LowerTriangular,
    SampleMatrix,
    SymMatrix,
    gram,
    tri_matmul_tt,
    tri_solve,
)
from src.linalg.norms import kl_loss, norms, spectral_norm
from src.utils.exceptions import DimensionError, SolverError


def random_lower(rng, p):
    dense = np.tril(rng.standard_normal((p, p)), -1)
    dense[np.diag_indices(p)] = rng.uniform(0.5, 2.0, p)
    return LowerTriangular.from_dense(dense)


def test_lower_triangular_rows_and_dense(rng):
    L = random_lower(rng, 5)
    dense = L.to_dense()
    assert np.allclose(np.triu(dense, 1), 0.0)
    for r in range(1, 6):
        assert np.array_equal(L.row(r), dense[r - 1, :r])
    assert np.array_equal(L.diagonal(), np.diag(dense))


def test_lower_triangular_is_read_only(rng):
    L = random_lower(rng, 3)
    with pytest.raises(ValueError):
        L.data[0] = 5.0


def test_lower_triangular_rejects_bad_diagonal():
    with pytest.raises(DimensionError):
        LowerTriangular.from_dense(np.array([[1.0, 0.0], [0.5, 0.0]]))
    with pytest.raises(DimensionError):
        LowerTriangular.from_dense(np.array([[1.0, 0.0], [np.nan, 1.0]]))


def test_from_rows_and_bandwidths():
    L = LowerTriangular.from_rows([
        [1.0],
        [0.0, 1.0],
        [0.3, 0.0, 1.0],
        [0.0, 0.0, -0.2, 1.0],
    ])
    assert list(L.bandwidths()) == [0, 0, 2, 1]
    with pytest.raises(DimensionError):
        LowerTriangular.from_rows([[1.0], [1.0]])


def test_tri_solve_and_product(rng):
    L = random_lower(rng, 6)
    b = rng.standard_normal(6)
    assert np.allclose(L.to_dense() @ tri_solve(L, b), b, atol=1e-12)
    B = rng.standard_normal((6, 3))
    assert np.allclose(L.to_dense() @ tri_solve(L, B), B, atol=1e-12)
    Omega = tri_matmul_tt(L)
    assert np.allclose(Omega.data, L.to_dense().T @ L.to_dense())
    assert Omega.min_eigenvalue() > 0


def test_matvec_matches_dense(rng):
    L = random_lower(rng, 4)
    X = rng.standard_normal((7, 4))
    assert np.allclose(L.matvec(X), X @ L.to_dense().T)


def test_sym_matrix_is_exactly_symmetric(rng):
    A = rng.standard_normal((4, 4))
    S = SymMatrix(A)
    assert np.array_equal(S.data, S.data.T)
    assert S.principal(2).p == 2


def test_sample_matrix_validation():
    with pytest.raises(DimensionError):
        SampleMatrix(np.array([[1.0, np.inf]]))
    X = SampleMatrix(np.array([1.0, -1.0]))
    assert (X.n, X.p) == (2, 1)
    assert np.allclose(X.centered().data.mean(axis=0), 0.0)


def test_gram_matches_definition(rng):
    X = SampleMatrix(rng.standard_normal((10, 4)))
    S = gram(X, 3)
    assert np.allclose(S.data, X.data[:, :3].T @ X.data[:, :3] / 10)


def test_spectral_norm_matches_svd(rng):
    for _ in range(5):
        A = rng.standard_normal((8, 8))
        assert spectral_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-8)
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_norms_of_diagonal():
    result = norms(np.diag([3.0, -4.0]))
    assert result.frobenius == pytest.approx(5.0)
    assert result.elementwise_inf == 4.0
    assert result.induced_inf == 4.0
    assert result.spectral == pytest.approx(4.0, rel=1e-9)


def test_norm_chain_on_random_matrices(rng):
    for p in (1, 3, 8, 20):
        for _ in range(10):
            A = rng.standard_normal((p, p)) * rng.uniform(0.1, 10.0)
            result = norms(A)
            assert result.elementwise_inf <= result.frobenius
            assert result.frobenius <= np.sqrt(p) * result.spectral * (1 + 1e-8)


def test_norms_of_single_entry():
    A = np.zeros((4, 4))
    A[1, 0] = 0.1
    result = norms(A)
    assert result.frobenius == pytest.approx(0.1)
    assert result.elementwise_inf == pytest.approx(0.1)
    assert result.induced_inf == pytest.approx(0.1)
    assert result.spectral == pytest.approx(0.1, rel=1e-8)


def test_kl_loss_zero_at_truth_and_positive_elsewhere(rng):
    L = random_lower(rng, 5)
    assert kl_loss(L, tri_matmul_tt(L)) == pytest.approx(0.0, abs=1e-12)
    other = random_lower(rng, 5)
    assert kl_loss(L, tri_matmul_tt(other)) > 0


def test_kl_loss_matches_dense_formula(rng):
    L = random_lower(rng, 4)
    Omega_hat = tri_matmul_tt(random_lower(rng, 4))
    Sigma = np.linalg.inv(L.to_dense().T @ L.to_dense())
    M = Sigma @ Omega_hat.data
    expected = (np.trace(M) - np.linalg.slogdet(M)[1] - 4) / 4
    assert kl_loss(L, Omega_hat) == pytest.approx(expected, rel=1e-10)


def test_kl_loss_rejects_indefinite(rng):
    L = random_lower(rng, 3)
    with pytest.raises(SolverError):
        kl_loss(L, SymMatrix(-np.eye(3)))
