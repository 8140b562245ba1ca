"""Exception hierarchy shared across the package."""

from __future__ import annotations


class FlowRecError(Exception):
    """Base class for all errors raised by this package."""


class RepositoryFormatError(FlowRecError):
    """The repository document is malformed or violates an invariant."""


class CycleError(RepositoryFormatError):
    """A workflow edge set contains a directed cycle."""

    def __init__(self, cycle: list[str], workflow_id: str | None = None):
        self.cycle = list(cycle)
        self.workflow_id = workflow_id
        where = f" in workflow '{workflow_id}'" if workflow_id else ""
        super().__init__(f"cycle detected: [{','.join(self.cycle)}]{where}")


class UnknownServiceError(FlowRecError):
    """A service id was referenced that does not exist in the given scope."""


class UnknownWorkflowError(FlowRecError):
    """A workflow id was referenced that does not exist in the repository."""


class TrainingError(FlowRecError):
    """Training could not start or had to abort."""


class TrainingDivergedError(TrainingError):
    """A non-finite value appeared during training.

    Carries the epoch and instance index so the run can be diagnosed.
    """

    def __init__(self, epoch: int, instance: int | None, detail: str):
        self.epoch = epoch
        self.instance = instance
        at = f"epoch {epoch}" + (f", instance {instance}" if instance is not None else "")
        super().__init__(f"non-finite value during training ({at}): {detail}")


class ModelFormatError(FlowRecError):
    """A persisted model file is unreadable or has the wrong version."""
