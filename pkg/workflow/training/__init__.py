"""
Optimizer, early-stopped training loop and the experiment grid.
"""

from workflow.training.optimizer import AdamW, adamw_step, init_state
from workflow.training.early_stopping import EarlyStopping
from workflow.training.trainer import TrainingLog, evaluate_loss, train_model
from workflow.training.experiment import FoldResult, GridJob, GridSubset, run_experiment, run_grid_job

__all__ = [
    'AdamW',
    'adamw_step',
    'init_state',
    'EarlyStopping',
    'TrainingLog',
    'evaluate_loss',
    'train_model',
    'FoldResult',
    'GridJob',
    'GridSubset',
    'run_experiment',
    'run_grid_job',
]
