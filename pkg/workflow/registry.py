#!/usr/bin/env python3

import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

from workflow.reporting.tables import (
    aggregate_csv_step,
    findings_step,
    granularity_tables_step,
    plot_data_step,
    timestep_tables_step,
)

logger = logging.getLogger('gaitlab.registry')

# Define step function type
StepFunction = Callable[[List[Any], Dict[str, Any]], Tuple[List[Any], Dict[str, Any]]]

DEFAULT_REPORT_STEPS = [
    "aggregate_csv",
    "granularity_tables",
    "timestep_tables",
    "plot_data",
    "findings",
]


class WorkflowStepRegistry:
    """Registry of report steps that can be composed into the report stage"""

    def __init__(self):
        self.report_steps: Dict[str, StepFunction] = {}
        self._register_all_steps()

    def _register_all_steps(self):
        """Register all available steps"""
        self.register_report_step("aggregate_csv", aggregate_csv_step)
        self.register_report_step("granularity_tables", granularity_tables_step)
        self.register_report_step("timestep_tables", timestep_tables_step)
        self.register_report_step("plot_data", plot_data_step)
        self.register_report_step("findings", findings_step)

    def register_report_step(self, name: str, step_func: StepFunction):
        """Register a report step"""
        self.report_steps[name] = step_func
        logger.debug(f"Registered report step: {name}")

    def get_report_steps(self, step_names: Optional[List[str]] = None) -> List[StepFunction]:
        """Get report steps by name or all if names not provided"""
        if step_names is None:
            step_names = DEFAULT_REPORT_STEPS
        unknown = [name for name in step_names if name not in self.report_steps]
        if unknown:
            raise KeyError(f"unknown report steps: {unknown}")
        return [self.report_steps[name] for name in step_names]
