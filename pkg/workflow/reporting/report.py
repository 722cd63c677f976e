#!/usr/bin/env python3

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

from utils import execute_step
from workflow.registry import WorkflowStepRegistry
from workflow.reporting.tables import aggregate_results

logger = logging.getLogger('gaitlab.reporting.report')


def emit_report(fold_results: Sequence, output_dir: Union[str, Path],
                step_names: Optional[List[str]] = None,
                registry: Optional[WorkflowStepRegistry] = None) -> dict:
    """Aggregate fold results and run the report steps into ``output_dir``.

    Returns the report mapping with the written paths under ``written`` and
    the directional checks under ``findings``.
    """
    aggregates = aggregate_results(fold_results)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    registry = registry or WorkflowStepRegistry()
    report = {'output_dir': output_dir, 'written': []}
    for step in registry.get_report_steps(step_names):
        aggregates, report = execute_step(step, aggregates, report)
    logger.info(f"Wrote {len(report['written'])} report files to {output_dir}")
    return report
