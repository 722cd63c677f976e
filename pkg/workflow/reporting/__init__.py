"""
AUROC, fold aggregation and report tables.
"""

from workflow.reporting.metrics import (
    ExperimentResult,
    FoldResult,
    aggregate,
    aggregate_folds,
    auroc,
    format_mean_std,
    mean_std,
)
from workflow.reporting.tables import read_results_csv, summarize_findings, write_results_csv, write_training_logs

__all__ = [
    'ExperimentResult',
    'FoldResult',
    'aggregate',
    'aggregate_folds',
    'auroc',
    'format_mean_std',
    'mean_std',
    'read_results_csv',
    'summarize_findings',
    'write_results_csv',
    'write_training_logs',
]
