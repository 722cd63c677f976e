"""
Workflow package for the gait lab.

This package contains the stages that simulate quadruped gait videos, train
the spatiotemporal graph classifier over the experiment grid and report AUROC
tables.
"""

__version__ = "1.0.0"

from workflow.registry import WorkflowStepRegistry
from workflow.stages import (
    ExperimentStage,
    ReportStage,
    SimulateStage,
)

__all__ = [
    '__version__',
    'WorkflowStepRegistry',
    'ExperimentStage',
    'ReportStage',
    'SimulateStage',
]
