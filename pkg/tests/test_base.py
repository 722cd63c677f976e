import pytest

from workflow.base import StageStatus, WorkflowStage
from workflow.context import WorkflowContext
from workflow.errors import ProtocolError


class ScriptedStage(WorkflowStage):
    def __init__(self, context, outcome):
        super().__init__("scripted", context)
        self.outcome = outcome

    def _do_execute(self) -> bool:
        if isinstance(self.outcome, Exception):
            raise self.outcome
        return self.outcome


@pytest.mark.parametrize("outcome, status", [(True, StageStatus.COMPLETED), (False, StageStatus.FAILED)])
def test_stage_status(tmp_path, outcome, status):
    stage = ScriptedStage(WorkflowContext(tmp_path), outcome)
    assert stage.status is StageStatus.NOT_STARTED
    assert stage.execute() is outcome
    assert stage.status is status
    assert stage.error is None
    assert stage.elapsed_s >= 0.0


def test_failure_keeps_the_exception(tmp_path):
    error = ProtocolError("training split has no samples")
    stage = ScriptedStage(WorkflowContext(tmp_path), error)
    assert stage.execute() is False
    assert stage.status is StageStatus.FAILED
    assert stage.error is error
