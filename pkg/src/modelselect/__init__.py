from .cv import (
    CVResult,
    cross_validate,
    fold_indices,
    negative_log_likelihood,
    run_folds,
    select_indices,
    summarize,
)
from .grid import lambda_grid

__all__ = [
    'CVResult',
    'cross_validate',
    'fold_indices',
    'lambda_grid',
    'negative_log_likelihood',
    'run_folds',
    'select_indices',
    'summarize',
]
