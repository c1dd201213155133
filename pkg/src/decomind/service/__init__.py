"""Job orchestration: persistence, the stage runner, configuration, REST API."""

from .store import DesignJob, JobStore, STATE_ORDER
from .runner import CANONICAL_STAGES, Components, JobRunner, ServiceNotReady
from .config import ServiceConfig

__all__ = [
    "CANONICAL_STAGES",
    "Components",
    "DesignJob",
    "JobRunner",
    "JobStore",
    "STATE_ORDER",
    "ServiceConfig",
    "ServiceNotReady",
]
