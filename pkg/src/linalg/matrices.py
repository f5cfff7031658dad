"""
Dense matrix containers used across hierband.

LowerTriangular keeps packed row-major storage: row r (0-based) occupies
data[r(r+1)/2 : (r+1)(r+2)/2], so a row prefix is a contiguous slice.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg as sla

from src.utils.exceptions import DimensionError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


def _row_offset(r: int) -> int:
    return r * (r + 1) // 2


@dataclass(frozen=True)
class LowerTriangular:
    """Lower-triangular p x p matrix with strictly positive diagonal."""

    p: int
    data: np.ndarray

    def __post_init__(self):
        if self.p < 1:
            raise DimensionError(f"dimension must be positive, got {self.p}")
        data = _frozen(np.ravel(self.data))
        if data.size != _row_offset(self.p):
            raise DimensionError(
                f"packed storage for p={self.p} needs {_row_offset(self.p)} "
                f"entries, got {data.size}"
            )
        if not np.all(np.isfinite(data)):
            raise DimensionError("lower-triangular entries must be finite")
        object.__setattr__(self, 'data', data)
        if np.any(self.diagonal() <= 0):
            raise DimensionError("diagonal entries must be strictly positive")

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "LowerTriangular":
        """Pack the lower triangle of a square array; the upper part is ignored."""
        dense = np.asarray(dense, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {dense.shape}")
        p = dense.shape[0]
        rows, cols = np.tril_indices(p)
        return cls(p=p, data=dense[rows, cols])

    @classmethod
    def from_rows(cls, rows) -> "LowerTriangular":
        """Build from a sequence of rows, row r holding entries (r, 1..r)."""
        rows = [np.asarray(row, dtype=np.float64) for row in rows]
        for r, row in enumerate(rows):
            if row.size != r + 1:
                raise DimensionError(f"row {r + 1} must have {r + 1} entries, got {row.size}")
        return cls(p=len(rows), data=np.concatenate(rows))

    @classmethod
    def identity(cls, p: int) -> "LowerTriangular":
        return cls.from_dense(np.eye(p))

    def row(self, r: int) -> np.ndarray:
        """Entries (r, 1..r) of 1-based row r as a read-only view."""
        if not 1 <= r <= self.p:
            raise DimensionError(f"row index {r} out of range 1..{self.p}")
        return self.data[_row_offset(r - 1):_row_offset(r)]

    def diagonal(self) -> np.ndarray:
        idx = np.array([_row_offset(r + 1) - 1 for r in range(self.p)], dtype=np.intp)
        return self.data[idx]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.p, self.p))
        rows, cols = np.tril_indices(self.p)
        dense[rows, cols] = self.data
        return dense

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Return L x."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.p:
            raise DimensionError(f"vector length {x.shape[-1]} does not match p={self.p}")
        return x @ self.to_dense().T

    def bandwidths(self, threshold: float = 0.0) -> np.ndarray:
        """Per-row K_r: off-diagonal entries after the leading run of zeros."""
        widths = np.zeros(self.p, dtype=np.int64)
        for r in range(2, self.p + 1):
            off = np.abs(self.row(r)[:-1]) > threshold
            nonzero = np.flatnonzero(off)
            widths[r - 1] = 0 if nonzero.size == 0 else (r - 1) - nonzero[0]
        return widths


@dataclass(frozen=True)
class SymMatrix:
    """Dense symmetric matrix; symmetry is exact by mirroring on construction."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {data.shape}")
        lower = np.tril(data)
        object.__setattr__(self, 'data', _frozen(lower + np.tril(data, -1).T))

    @property
    def p(self) -> int:
        return self.data.shape[0]

    def principal(self, r: int) -> "SymMatrix":
        """Leading r x r principal submatrix."""
        if not 1 <= r <= self.p:
            raise DimensionError(f"order {r} out of range 1..{self.p}")
        return SymMatrix(self.data[:r, :r])

    def min_eigenvalue(self) -> float:
        return float(sla.eigvalsh(self.data, subset_by_index=[0, 0])[0])


@dataclass(frozen=True)
class SampleMatrix:
    """n x p matrix of observations, one row per sample."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionError(f"expected a non-empty n x p matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DimensionError("sample matrix entries must be finite")
        object.__setattr__(self, 'data', _frozen(data))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def take(self, indices) -> "SampleMatrix":
        return SampleMatrix(self.data[np.asarray(indices)])

    def centered(self) -> "SampleMatrix":
        return SampleMatrix(self.data - self.data.mean(axis=0))


MatrixLike = Union[np.ndarray, SymMatrix, LowerTriangular]


def as_array(A: MatrixLike) -> np.ndarray:
    if isinstance(A, LowerTriangular):
        return A.to_dense()
    if isinstance(A, SymMatrix):
        return A.data
    return np.asarray(A, dtype=np.float64)


def gram(X: SampleMatrix, r: int) -> SymMatrix:
    """(1/n) X_{1:r}^T X_{1:r}."""
    if not 1 <= r <= X.p:
        raise DimensionError(f"column count {r} out of range 1..{X.p}")
    block = X.data[:, :r]
    return SymMatrix(block.T @ block / X.n)


def tri_matmul_tt(L: LowerTriangular) -> SymMatrix:
    """L^T L, symmetric positive definite."""
    dense = L.to_dense()
    return SymMatrix(dense.T @ dense)


def tri_solve(L: LowerTriangular, b: np.ndarray) -> np.ndarray:
    """Forward substitution: y with L y = b. Columns of a 2-d b are solved together."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != L.p:
        raise DimensionError(f"right-hand side length {b.shape[0]} does not match p={L.p}")
    return sla.solve_triangular(L.to_dense(), b, lower=True, check_finite=False)
