#!/usr/bin/env python3
"""Stage base class shared by the simulate, experiment and report commands."""

import logging
import time
from enum import Enum, auto
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from workflow.context import WorkflowContext


class StageStatus(Enum):
    NOT_STARTED = auto()
    IN_PROGRESS = auto()
    COMPLETED = auto()
    FAILED = auto()


class WorkflowStage:
    """One command's unit of work: reads its inputs, writes into ``context.output_dir``.

    Subclasses implement ``_do_execute``. Any exception it raises marks the
    stage FAILED and is kept on ``error`` so the caller can print its category.
    """

    def __init__(self, name: str, context: 'WorkflowContext'):
        self.name = name
        self.context = context
        self.status = StageStatus.NOT_STARTED
        self.error: Optional[BaseException] = None
        self.elapsed_s: Optional[float] = None
        self.logger = logging.getLogger(f'gaitlab.{name}')

    def execute(self) -> bool:
        started = time.perf_counter()
        try:
            self.status = StageStatus.IN_PROGRESS
            self.logger.info(f"Starting stage {self.name}, writing to {self.context.output_dir}")

            success = self._do_execute()

            self.status = StageStatus.COMPLETED if success else StageStatus.FAILED
            return success
        except Exception as e:
            self.status = StageStatus.FAILED
            self.error = e
            self.logger.error(f"Stage {self.name} failed: {e}", exc_info=True)
            return False
        finally:
            self.elapsed_s = time.perf_counter() - started
            self.logger.info(f"Stage {self.name} finished as {self.status.name} in {self.elapsed_s:.1f}s")

    def _do_execute(self) -> bool:
        raise NotImplementedError
