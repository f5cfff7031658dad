from .fit import (
    FitResult,
    diagonal_fit,
    fit,
    fit_gram,
    fit_path,
    lambda_max,
    objective,
    omega,
    row_lambda_max,
    sample_covariance,
)
from .support import SupportReport, sign_support

__all__ = [
    'FitResult',
    'SupportReport',
    'diagonal_fit',
    'fit',
    'fit_gram',
    'fit_path',
    'lambda_max',
    'objective',
    'omega',
    'row_lambda_max',
    'sample_covariance',
    'sign_support',
]
