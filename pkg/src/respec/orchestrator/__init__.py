"""Repair pipeline orchestration: sessions, event store, and review service."""

from respec.orchestrator.engine import PipelineContext, SessionRunner, StageFailure
from respec.orchestrator.session import (
    DECLARED_EDGES,
    ClosedOutcome,
    ReviewAction,
    ReviewDecision,
    ReviewSubject,
    SessionState,
    UndeclaredTransition,
    WrongState,
    replay_events,
)
from respec.orchestrator.store import SessionStore

__all__ = [
    "ClosedOutcome",
    "DECLARED_EDGES",
    "PipelineContext",
    "ReviewAction",
    "ReviewDecision",
    "ReviewSubject",
    "SessionRunner",
    "SessionState",
    "SessionStore",
    "StageFailure",
    "UndeclaredTransition",
    "WrongState",
    "replay_events",
]
