from .experiments import bandwidth_spearman, replicate_seeds, run_accuracy_experiment
from .metrics import ErrorReport, error_report
from .models import (
    GroundTruth,
    Model,
    SimulationSpec,
    generate_truth,
    make_truth,
    nonzero_ratio,
    sample,
    simulate,
)
from .roc import perfect_recovery, roc_curve, roc_frame

__all__ = [
    'ErrorReport',
    'GroundTruth',
    'Model',
    'SimulationSpec',
    'bandwidth_spearman',
    'error_report',
    'generate_truth',
    'make_truth',
    'nonzero_ratio',
    'perfect_recovery',
    'replicate_seeds',
    'roc_curve',
    'roc_frame',
    'run_accuracy_experiment',
    'sample',
    'simulate',
]
