"""Session states, the declared transition set, and event-log replay."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class SessionState(Enum):
    NEW = "New"
    LOCALIZED = "Localized"
    CONTEXT_BUILT = "ContextBuilt"
    SPEC_DRAFTED = "SpecDrafted"
    SPEC_REFINING = "SpecRefining"
    SPEC_SETTLED = "SpecSettled"
    PATCHING_PLAIN = "PatchingPlain"
    PATCHING_MIXED = "PatchingMixed"
    VALIDATED = "Validated"
    AWAITING_REVIEW = "AwaitingReview"
    CLOSED = "Closed"


class ClosedOutcome(Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    EXHAUSTED = "Exhausted"


DECLARED_EDGES: frozenset[tuple[SessionState, SessionState]] = frozenset(
    {
        (SessionState.NEW, SessionState.LOCALIZED),
        (SessionState.LOCALIZED, SessionState.CONTEXT_BUILT),
        (SessionState.CONTEXT_BUILT, SessionState.SPEC_DRAFTED),
        (SessionState.SPEC_DRAFTED, SessionState.SPEC_REFINING),
        (SessionState.SPEC_REFINING, SessionState.SPEC_REFINING),
        (SessionState.SPEC_REFINING, SessionState.SPEC_SETTLED),
        (SessionState.SPEC_SETTLED, SessionState.PATCHING_PLAIN),
        (SessionState.PATCHING_PLAIN, SessionState.VALIDATED),
        (SessionState.PATCHING_PLAIN, SessionState.PATCHING_MIXED),
        (SessionState.PATCHING_MIXED, SessionState.VALIDATED),
        (SessionState.VALIDATED, SessionState.AWAITING_REVIEW),
        # human-driven back edges
        (SessionState.AWAITING_REVIEW, SessionState.CLOSED),
        (SessionState.AWAITING_REVIEW, SessionState.PATCHING_MIXED),
        (SessionState.AWAITING_REVIEW, SessionState.VALIDATED),
    }
)


class UndeclaredTransition(Exception):
    def __init__(self, source: str, target: str, seq: int):
        super().__init__(f"undeclared transition {source} -> {target} at event {seq}")
        self.source = source
        self.target = target
        self.seq = seq


class WrongState(Exception):
    pass


class UnknownSession(Exception):
    pass


class ReviewSubject(Enum):
    SPEC = "Spec"
    PATCH = "Patch"


class ReviewAction(Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    EDIT = "Edit"


@dataclass(frozen=True)
class ReviewDecision:
    session_id: str
    subject: ReviewSubject
    action: ReviewAction
    reviewer: str
    decided_at: str = ""
    new_text: str = ""

    def __post_init__(self) -> None:
        if self.action is ReviewAction.EDIT and not self.new_text.strip():
            raise ValueError("Edit decisions carry non-empty replacement text")


@dataclass
class SessionView:
    """State reconstructed purely by replaying a session's event log."""

    case_id: str
    state: SessionState = SessionState.NEW
    closed_outcome: ClosedOutcome | None = None
    seq: int = 0
    artifacts: dict[str, str] = field(default_factory=dict)  # label -> artifact id
    decisions: list[dict] = field(default_factory=list)
    reject_rounds: int = 0
    events: list[dict] = field(default_factory=list)


def replay_events(case_id: str, events: list[dict]) -> SessionView:
    """Rebuild a session view; raises UndeclaredTransition on a bad log."""
    view = SessionView(case_id=case_id)
    for event in events:
        view.events.append(event)
        view.seq = event["seq"]
        if event["type"] == "transition":
            source = SessionState(event["from"])
            target = SessionState(event["to"])
            if source is not view.state:
                raise UndeclaredTransition(view.state.value, source.value, event["seq"])
            if (source, target) not in DECLARED_EDGES:
                raise UndeclaredTransition(source.value, target.value, event["seq"])
            if view.state is SessionState.CLOSED:
                raise UndeclaredTransition("Closed", target.value, event["seq"])
            view.state = target
            if target is SessionState.CLOSED:
                view.closed_outcome = ClosedOutcome(event["data"]["outcome"])
            for label, artifact_id in event.get("artifacts", {}).items():
                view.artifacts[label] = artifact_id
            data = event.get("data", {})
            if data.get("review_action") == "Reject" and target is SessionState.PATCHING_MIXED:
                view.reject_rounds += 1
        elif event["type"] == "review":
            view.decisions.append(event["data"])
        elif event["type"] == "failure":
            pass  # failures leave the state untouched
    return view
