"""
Ground-truth generators for the four simulation models and Gaussian sampling.

Truth is parameterized as L = D^-1 T with D_rr ~ U[2, 5] and T unit lower
triangular:
    M1  T_{r,r-1} = 0.8 (strictly banded, K_r = 1)
    M2  5 diagonal blocks; each row draws a bandwidth with probability 0.5
    M3  as M2 with 2 blocks
    M4  one dense lower-triangular block on rows/columns p/4+1 .. 3p/4

Randomness comes from Philox generators on independent SeedSequence streams
(D, structure, values, noise), so each part is reproducible on its own.
"""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np

from src.linalg.matrices import LowerTriangular, SampleMatrix, tri_solve
from src.utils.exceptions import DimensionError
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

D_RANGE = (2.0, 5.0)
M1_COEFFICIENT = 0.8
BLOCK_VALUE_RANGE = (0.1, 0.4)
DENSE_VALUE_RANGE = (0.1, 0.2)
BANDWIDTH_PROBABILITY = 0.5


class Model(str, Enum):
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M4 = "M4"

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, cls):
            return value
        text = str(value).upper()
        if not text.startswith("M"):
            text = "M" + text
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown model {value!r}; expected one of M1, M2, M3, M4")

    @property
    def divisor(self) -> int:
        return {Model.M1: 1, Model.M2: 5, Model.M3: 2, Model.M4: 4}[self]


@dataclass(frozen=True)
class SimulationSpec:
    model: Model
    p: int
    n: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'model', Model.parse(self.model))
        if self.p < 1 or self.n < 1:
            raise DimensionError(f"p and n must be positive, got p={self.p}, n={self.n}")
        if self.p % self.model.divisor:
            raise DimensionError(
                f"{self.model.value} needs p divisible by {self.model.divisor}, got p={self.p}"
            )
        if not 0 <= self.seed < 2 ** 64:
            raise DimensionError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class GroundTruth:
    """True factor with its per-row bandwidths K_r."""

    L: LowerTriangular
    bandwidths: np.ndarray
    spec: SimulationSpec


class _Streams(NamedTuple):
    diagonal: np.random.Generator
    structure: np.random.Generator
    values: np.random.Generator
    noise: np.random.Generator


def _streams(seed: int) -> _Streams:
    children = np.random.SeedSequence(seed).spawn(4)
    return _Streams(*(np.random.Generator(np.random.Philox(child)) for child in children))


def _signed(rng: np.random.Generator, size: int, bounds: Tuple[float, float]) -> np.ndarray:
    magnitude = rng.uniform(bounds[0], bounds[1], size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return magnitude * sign


def _banded_T(p: int) -> Tuple[np.ndarray, np.ndarray]:
    T = np.eye(p)
    idx = np.arange(1, p)
    T[idx, idx - 1] = M1_COEFFICIENT
    K = np.ones(p, dtype=np.int64)
    K[0] = 0
    return T, K


def _block_T(p: int, blocks: int, streams: _Streams) -> Tuple[np.ndarray, np.ndarray]:
    T = np.eye(p)
    K = np.zeros(p, dtype=np.int64)
    size = p // blocks
    for start in range(0, p, size):
        # local row i has i predecessors inside its block
        for i in range(1, size):
            if streams.structure.random() >= BANDWIDTH_PROBABILITY:
                continue
            k = int(streams.structure.integers(1, i, endpoint=True))
            row = start + i
            T[row, row - k:row] = _signed(streams.values, k, BLOCK_VALUE_RANGE)
            K[row] = k
    return T, K


def _dense_T(p: int, streams: _Streams) -> Tuple[np.ndarray, np.ndarray]:
    T = np.eye(p)
    K = np.zeros(p, dtype=np.int64)
    first, last = p // 4, 3 * p // 4
    for row in range(first + 1, last):
        k = row - first
        T[row, first:row] = _signed(streams.values, k, DENSE_VALUE_RANGE)
        K[row] = k
    return T, K


def generate_truth(spec: SimulationSpec, unit_scale: bool = False) -> GroundTruth:
    """
    Build L = D^-1 T for spec.model.

    Args:
        spec: model, dimension and seed
        unit_scale: force D = I (T is returned as L)

    Returns:
        GroundTruth with the factor and its bandwidths
    """
    streams = _streams(spec.seed)
    p = spec.p
    if spec.model is Model.M1:
        T, K = _banded_T(p)
    elif spec.model is Model.M4:
        T, K = _dense_T(p, streams)
    else:
        T, K = _block_T(p, 5 if spec.model is Model.M2 else 2, streams)

    D = np.ones(p) if unit_scale else streams.diagonal.uniform(D_RANGE[0], D_RANGE[1], p)
    L = LowerTriangular.from_dense(T / D[:, None])

    logger.debug(
        "truth_generated",
        model=spec.model.value,
        p=p,
        seed=spec.seed,
        nonzero_ratio=nonzero_ratio(L),
    )
    return GroundTruth(L=L, bandwidths=K, spec=spec)


def make_truth(spec: SimulationSpec, unit_scale: bool = False) -> LowerTriangular:
    return generate_truth(spec, unit_scale).L


def sample(L: LowerTriangular, n: int, seed: int = 0) -> SampleMatrix:
    """n draws from N(0, (L^T L)^-1): x_i solves L x_i = z_i with z_i standard normal."""
    if n < 1:
        raise DimensionError(f"sample count must be positive, got n={n}")
    Z = _streams(seed).noise.standard_normal((n, L.p))
    return SampleMatrix(tri_solve(L, Z.T).T)


def simulate(spec: SimulationSpec, unit_scale: bool = False) -> Tuple[GroundTruth, SampleMatrix]:
    """Truth and spec.n samples from it, both driven by spec.seed."""
    truth = generate_truth(spec, unit_scale)
    return truth, sample(truth.L, spec.n, spec.seed)


def nonzero_ratio(L: LowerTriangular) -> float:
    """Share of nonzero entries in the lower triangle, diagonal included."""
    return float(np.count_nonzero(L.data)) / L.data.size
