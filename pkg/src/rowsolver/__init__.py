from .admm import (
    BetaSystem,
    RowProblem,
    RowSolution,
    RowState,
    beta_update,
    rho_update,
    row_kkt_residual,
    row_objective,
    solve_row,
)
from .config import SolverConfig, load_settings

__all__ = [
    'BetaSystem',
    'RowProblem',
    'RowSolution',
    'RowState',
    'SolverConfig',
    'beta_update',
    'load_settings',
    'rho_update',
    'row_kkt_residual',
    'row_objective',
    'solve_row',
]
