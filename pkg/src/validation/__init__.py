from .schemas import LabeledSchema, SampleSchema, ValidationReport, feature_names
from .validators import DataValidator, read_labeled_csv, read_sample_csv

__all__ = [
    'DataValidator',
    'LabeledSchema',
    'SampleSchema',
    'ValidationReport',
    'feature_names',
    'read_labeled_csv',
    'read_sample_csv',
]
