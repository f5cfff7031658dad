"""
Shared fixtures for the hierband test suite.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import numpy as np
import pytest

from src.linalg.matrices import SampleMatrix
from src.rowsolver.config import SolverConfig
from src.simulate.models import Model, SimulationSpec, generate_truth, sample


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def tight_cfg():
    """Solver settings for tests that compare against reference solutions."""
    return SolverConfig(eps_abs=1e-10, eps_rel=1e-10, max_iter=50_000)


@pytest.fixture
def banded_truth():
    """M1 truth with D = I, p = 8."""
    return generate_truth(SimulationSpec(model=Model.M1, p=8, n=200, seed=7), unit_scale=True)


@pytest.fixture
def banded_samples(banded_truth):
    return sample(banded_truth.L, 200, seed=7)


@pytest.fixture
def random_samples(rng):
    """Correlated 60 x 6 design with unit-scale columns."""
    mixing = np.eye(6) + 0.3 * rng.standard_normal((6, 6))
    return SampleMatrix(rng.standard_normal((60, 6)) @ mixing)


@pytest.fixture
def write_csv():
    """Write rows of values as a headerless CSV file."""
    def _write(path: Path, rows) -> Path:
        path.write_text("\n".join(",".join(str(v) for v in row) for row in rows) + "\n")
        return path
    return _write
