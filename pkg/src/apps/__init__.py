from .discriminant import (
    ClassModel,
    ClassParams,
    Mode,
    classifier_grid,
    classify,
    confusion_matrix,
    cross_validate_classifier,
    fit_classifier,
    misclassification_rate,
    predict,
)
from .prediction import prediction_error, prediction_error_path, split_indices, train_test_split

__all__ = [
    'ClassModel',
    'ClassParams',
    'Mode',
    'classifier_grid',
    'classify',
    'confusion_matrix',
    'cross_validate_classifier',
    'fit_classifier',
    'misclassification_rate',
    'predict',
    'prediction_error',
    'prediction_error_path',
    'split_indices',
    'train_test_split',
]
