from .matrices import (
    LowerTriangular,
    SampleMatrix,
    SymMatrix,
    gram,
    tri_matmul_tt,
    tri_solve,
)
from .norms import MatrixNorms, kl_loss, norms, spectral_norm

__all__ = [
    'LowerTriangular',
    'SampleMatrix',
    'SymMatrix',
    'gram',
    'tri_matmul_tt',
    'tri_solve',
    'MatrixNorms',
    'kl_loss',
    'norms',
    'spectral_norm',
]
