from .prox import (
    ProxResult,
    newton_root,
    penalty_value,
    prox,
    prox_general,
    prox_unit,
    subgradient_residual,
    taper_formula,
)
from .weights import WeightScheme, weight_table

__all__ = [
    'ProxResult',
    'WeightScheme',
    'newton_root',
    'penalty_value',
    'prox',
    'prox_general',
    'prox_unit',
    'subgradient_residual',
    'taper_formula',
    'weight_table',
]
