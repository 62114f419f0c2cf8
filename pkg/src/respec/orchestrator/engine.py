"""Stage execution: drives one BugCase through the pipeline state machine.

Each advance() executes exactly one stage and appends one transition event;
everything a stage needs is reconstructed from the case plus previously
persisted artifacts, so a crashed session resumes by replaying its log and
re-running the interrupted stage (deterministic under replay policy).
"""

from __future__ import annotations

import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from respec import SCHEMA_VERSION
from respec.clock import SYSTEM_CLOCK, Clock
from respec.config import RespecConfig
from respec.core.diff import apply_patch, parse_unified_diff
from respec.core.model import (
    BugCase,
    CandidatePatch,
    MethodRef,
    OriginMode,
    TestRef,
    bug_case_to_json,
)
from respec.gateway import GatewayClient, MissingTranscript, ProviderError
from respec.index.build import build_index
from respec.index.model import CodeIndex, MethodRecord, index_to_json
from respec.jml import SpecStatus
from respec.orchestrator.session import (
    ClosedOutcome,
    ReviewAction,
    ReviewDecision,
    ReviewSubject,
    SessionState,
    SessionView,
    WrongState,
    replay_events,
)
from respec.orchestrator.store import SessionStore
from respec.patching import AttemptOutcome, run_mode_attempts
from respec.synthesis import (
    SpecDraft,
    draft_specs,
    make_draft,
    refine_draft,
    resolve_target,
    settle,
    test_excerpts,
    verify_draft,
)
from respec.taxonomy import classify_bug_type
from respec.validation import (
    SuiteStatus,
    TestCommand,
    judge,
    localize_from_failures,
    read_snapshot,
    run_tests,
    write_snapshot,
)
from respec.verifier import OutcomeStatus, SubprocessVerifier, VerificationOutcome


class StageFailure(Exception):
    """A stage could not complete; the session stays in its prior state."""

    def __init__(self, state: SessionState, cause: str):
        super().__init__(f"stage {state.value} failed: {cause}")
        self.state = state
        self.cause = cause


def _render_paths(template: str, values: dict[str, str]) -> str:
    for name, value in values.items():
        template = template.replace("{" + name + "}", value)
    return template


@dataclass
class PipelineContext:
    """Everything shared by session runners for one pipeline run."""

    config: RespecConfig
    client: GatewayClient
    store: SessionStore
    clock_factory: Callable[[], Clock] = field(default=lambda: SYSTEM_CLOCK)

    def make_runner(self, case: BugCase) -> "SessionRunner":
        return SessionRunner(self, case)


class SessionRunner:
    def __init__(self, context: PipelineContext, case: BugCase):
        self.context = context
        self.config = context.config
        self.store = context.store
        self.client = context.client
        self.case = case
        self.clock = context.clock_factory()
        self._index: CodeIndex | None = None
        self._pristine: dict[str, str] | None = None
        if not self.store.has_session(case.case_id):
            self.store.put_case(case.case_id, bug_case_to_json(case))

    # ---- replay & bookkeeping ------------------------------------------

    @property
    def view(self) -> SessionView:
        return replay_events(self.case.case_id, self.store.read_events(self.case.case_id))

    @property
    def state(self) -> SessionState:
        return self.view.state

    def _transition(
        self,
        source: SessionState,
        target: SessionState,
        data: dict | None = None,
        artifacts: dict[str, str] | None = None,
    ) -> None:
        view = self.view
        event = {
            "schema_version": SCHEMA_VERSION,
            "seq": view.seq + 1,
            "type": "transition",
            "from": source.value,
            "to": target.value,
            "at": self.clock.now(),
            "data": data or {},
            "artifacts": artifacts or {},
        }
        self.store.append_event(self.case.case_id, event)

    def _record_failure(self, state: SessionState, cause: str) -> None:
        view = self.view
        event = {
            "schema_version": SCHEMA_VERSION,
            "seq": view.seq + 1,
            "type": "failure",
            "at": self.clock.now(),
            "data": {"state": state.value, "cause": cause},
        }
        self.store.append_event(self.case.case_id, event)

    def _artifact(self, name: str, payload) -> str:
        return self.store.put_artifact(self.case.case_id, name, payload)

    def _get(self, label: str):
        view = self.view
        if label not in view.artifacts:
            raise StageFailure(view.state, f"missing artifact {label}")
        return self.store.get_artifact(self.case.case_id, view.artifacts[label])

    # ---- shared lazies ---------------------------------------------------

    def index(self) -> CodeIndex:
        if self._index is None:
            self._index = build_index(self.case.project_root, clock=self.clock)
        return self._index

    def pristine(self) -> dict[str, str]:
        if self._pristine is None:
            self._pristine = read_snapshot(Path(self.case.project_root))
        return self._pristine

    def _session_dir(self) -> Path:
        return self.store.session_dir(self.case.case_id)

    def _verifier(self) -> SubprocessVerifier:
        placeholders = self.config.resolved_paths()
        placeholders["state_dir"] = str(self._session_dir() / "verifier-state")
        return SubprocessVerifier(
            command_template=_render_paths(self.config.verifier.command, placeholders),
            classpath=self.config.verifier.classpath,
            timeout=self.config.verifier.timeout,
        )

    def _test_command(self) -> TestCommand:
        placeholders = self.config.resolved_paths()
        return TestCommand(
            test_command=_render_paths(self.config.testing.test_command, placeholders),
            build_command=_render_paths(self.config.testing.build_command, placeholders),
            timeout=self.config.testing.timeout,
            parallel_safe=self.config.testing.parallel_safe,
        )

    def _target_record(self) -> MethodRecord:
        localization = self._get("localization")
        ref = localization["method"]
        record = self.index().find_method(
            ref["qualified_class"], ref["method_name"], ref.get("signature") or None
        )
        if record is None:
            raise StageFailure(self.state, f"target method vanished: {ref}")
        return record

    def _timeout_override(self) -> float | None:
        localization = self._get("localization")
        if localization.get("category") == "InfiniteLoopOrStackOverflow":
            return self.config.testing.timeout * self.config.testing.infinite_loop_timeout_factor
        return None

    def _provided_suite(self) -> list[TestRef]:
        """The case's provided tests plus their test-class siblings."""
        index = self.index()
        suite: list[TestRef] = list(self.case.provided_tests())
        seen = {(t.qualified_class, t.test_name) for t in suite}
        classes = []
        for test in self.case.provided_tests():
            if test.qualified_class not in classes:
                classes.append(test.qualified_class)
        for qualified_class in classes:
            siblings = [
                ref
                for ref in index.methods
                if ref.qualified_class == qualified_class
                and ref.method_name.startswith("test")
            ]
            siblings.sort(key=lambda r: (r.file_path, r.line_span.start))
            for ref in siblings:
                key = (ref.qualified_class, ref.method_name)
                if key not in seen:
                    seen.add(key)
                    suite.append(TestRef(ref.qualified_class, ref.method_name))
        return suite

    def _heldout_sources(self) -> dict[str, str]:
        heldout_dir = self.config.paths.get("heldout_dir", "")
        if not heldout_dir:
            return {}
        path = self.config.resolve(heldout_dir)
        if not path.is_dir():
            return {}
        return read_snapshot(path)

    def _judge_candidate(self, candidate: CandidatePatch, sink: dict[str, str]):
        """Judge one candidate; records its artifacts into `sink` for the
        enclosing stage's transition event."""
        workdir = self._session_dir() / "work" / candidate.patch_id
        try:
            verdict = judge(
                candidate,
                self.case,
                self.pristine(),
                self._test_command(),
                workdir,
                provided_suite=self._provided_suite(),
                heldout_sources=self._heldout_sources(),
                timeout_override=self._timeout_override(),
            )
        finally:
            # scratch trees are not session artifacts
            shutil.rmtree(workdir, ignore_errors=True)
            shutil.rmtree(
                workdir.parent / (workdir.name + "-heldout"), ignore_errors=True
            )
        sink[f"candidate-{candidate.patch_id}"] = self._artifact(
            f"candidate-{candidate.patch_id}", _candidate_payload(candidate)
        )
        sink[f"verdict-{candidate.patch_id}"] = self._artifact(
            f"verdict-{candidate.patch_id}", _verdict_payload(verdict)
        )
        return verdict

    # ---- stages ---------------------------------------------------------

    def advance(self) -> SessionState:
        """Execute exactly one stage and transition along a declared edge."""
        state = self.state
        stages = {
            SessionState.NEW: self._stage_new,
            SessionState.LOCALIZED: self._stage_localized,
            SessionState.CONTEXT_BUILT: self._stage_context_built,
            SessionState.SPEC_DRAFTED: self._stage_spec_drafted,
            SessionState.SPEC_REFINING: self._stage_spec_refining,
            SessionState.SPEC_SETTLED: self._stage_spec_settled,
            SessionState.PATCHING_PLAIN: self._stage_patching_plain,
            SessionState.PATCHING_MIXED: self._stage_patching_mixed,
            SessionState.VALIDATED: self._stage_validated,
        }
        stage = stages.get(state)
        if stage is None:
            raise WrongState(f"cannot advance a session in state {state.value}")
        try:
            stage()
        except StageFailure as failure:
            self._record_failure(state, failure.cause)
            raise
        except (MissingTranscript, ProviderError) as exc:
            # gateway trouble aborts this session's step, never the process
            cause = f"gateway: {exc}"
            self._record_failure(state, cause)
            raise StageFailure(state, cause) from exc
        return self.state

    def run_to_review(self) -> SessionState:
        """Advance until the session needs a human (or closes).

        Progress is measured by the event log, not the state name: the
        SpecRefining self-loop legitimately stays in place while iterating.
        """
        while self.state not in (SessionState.AWAITING_REVIEW, SessionState.CLOSED):
            before_seq = self.view.seq
            self.advance()
            if self.view.seq == before_seq:
                break  # parked: stage appended nothing
        return self.state

    def _stage_new(self) -> None:
        index = self.index()
        baseline = run_tests(
            self._baseline_dir(), list(self.case.provided_tests()), self._test_command(),
            self._baseline_timeout(),
        )
        if baseline.status is SuiteStatus.ALL_PASS and self.case.provided_tests():
            raise StageFailure(
                SessionState.NEW, "failing tests pass against the pristine project"
            )
        failure_logs = baseline.combined_log()

        record: MethodRecord | None = None
        ranking: list[MethodRef] = []
        if self.case.buggy_method is not None:
            try:
                record = resolve_target(self.case, index)
            except Exception:
                record = None
        if record is None:
            ranking = localize_from_failures(self.case, index, failure_logs)
            if ranking:
                record = index.methods.get(ranking[0])
        if record is None:
            raise StageFailure(
                SessionState.NEW,
                "no buggy method known and localization found no signal",
            )

        category = self.case.category.value if self.case.category else classify_bug_type(
            self.case, failure_logs
        ).value

        artifacts = {
            "baseline": self._artifact(
                "baseline",
                {
                    "status": baseline.status.value,
                    "tests": [
                        {"test": r.ref.test_id, "status": r.status.value, "log": r.log}
                        for r in baseline.results
                    ],
                },
            ),
            "localization": self._artifact(
                "localization",
                {
                    "method": _ref_payload(record.ref),
                    "ranking": [_ref_payload(ref) for ref in ranking[:10]],
                    "category": category,
                    "from_case": self.case.buggy_method is not None,
                },
            ),
        }
        self._transition(
            SessionState.NEW,
            SessionState.LOCALIZED,
            {"category": category, "method": record.ref.qualified_name},
            artifacts,
        )

    def _baseline_dir(self) -> Path:
        # the pristine tree is read-only; materialize a copy for the baseline run
        target = self._session_dir() / "work" / "baseline"
        write_snapshot(self.pristine(), target)
        return target

    def _baseline_timeout(self) -> float | None:
        if self.case.category is not None and self.case.category.value == (
            "InfiniteLoopOrStackOverflow"
        ):
            return self.config.testing.timeout * self.config.testing.infinite_loop_timeout_factor
        return None

    def _stage_localized(self) -> None:
        index = self.index()
        artifact_id = self._artifact(
            "context-index", index_to_json(index, include_volatile=False)
        )
        shutil.rmtree(self._session_dir() / "work" / "baseline", ignore_errors=True)
        self._transition(
            SessionState.LOCALIZED,
            SessionState.CONTEXT_BUILT,
            {"method_count": index.method_count()},
            {"context-index": artifact_id},
        )

    def _stage_context_built(self) -> None:
        localization = self._get("localization")
        case = self.case
        if case.buggy_method is None:
            ref = localization["method"]
            case = BugCase(
                case_id=case.case_id,
                project_root=case.project_root,
                report_text=case.report_text,
                failing_tests=case.failing_tests,
                buggy_method=MethodRef(
                    ref["file_path"],
                    ref["qualified_class"],
                    ref["method_name"],
                    ref["signature"],
                    _span_from_payload(ref),
                ),
                category=case.category,
            )
        target_draft, callee_drafts = draft_specs(
            case, self.index(), self.client, self.config.prompt("spec_draft")
        )
        payload = {
            "target": _draft_payload(target_draft),
            "callees": [_draft_payload(d) for d in callee_drafts],
        }
        artifact_id = self._artifact("spec-draft", payload)
        self._transition(
            SessionState.CONTEXT_BUILT,
            SessionState.SPEC_DRAFTED,
            {"callee_count": len(callee_drafts)},
            {"spec-draft": artifact_id},
        )

    def _scratch_dir(self) -> Path:
        return self._session_dir() / "scratch"

    def _verify_attempt(self, draft: SpecDraft, iteration: int) -> dict:
        outcome = verify_draft(draft, self._verifier(), self._scratch_dir())
        settled_spec = settle(draft, outcome)
        return {
            "iteration": iteration,
            "text": draft.text,
            "parsed_ok": draft.parsed_ok,
            "outcome": {
                "status": outcome.status.value,
                "diagnostics": list(outcome.diagnostics),
                "raw_output": outcome.raw_output,
                "exit_code": outcome.exit_code,
            },
            "spec_status": (settled_spec or draft.spec).status.value,
        }

    def _stage_spec_drafted(self) -> None:
        draft_payload = self._get("spec-draft")["target"]
        draft = make_draft(self._target_record(), draft_payload["text"])
        attempt = self._verify_attempt(draft, 1)
        self._transition(
            SessionState.SPEC_DRAFTED,
            SessionState.SPEC_REFINING,
            {"iteration": 1, "outcome": attempt["outcome"]["status"]},
            {"spec-attempt-1": self._artifact("spec-attempt-1", attempt)},
        )

    def _spec_attempts(self) -> list[dict]:
        view = self.view
        attempts = []
        for label, artifact_id in view.artifacts.items():
            if label.startswith("spec-attempt-"):
                attempts.append(self.store.get_artifact(self.case.case_id, artifact_id))
        attempts.sort(key=lambda a: a["iteration"])
        return attempts

    def _stage_spec_refining(self) -> None:
        attempts = self._spec_attempts()
        if not attempts:
            raise StageFailure(SessionState.SPEC_REFINING, "no verification attempts recorded")
        last = attempts[-1]
        terminal_status = last["outcome"]["status"]
        max_iterations = self.config.budgets.max_iterations

        if terminal_status in ("Verified", "BugSignal"):
            final = {
                "text": last["text"],
                "status": last["spec_status"],
                "terminal": terminal_status,
                "iterations": last["iteration"],
            }
            self._transition(
                SessionState.SPEC_REFINING,
                SessionState.SPEC_SETTLED,
                {"terminal": terminal_status, "iterations": last["iteration"]},
                {"spec-final": self._artifact("spec-final", final)},
            )
            return
        if last["iteration"] >= max_iterations:
            final = {
                "text": last["text"],
                "status": last["spec_status"],
                "terminal": "BudgetExhausted",
                "iterations": last["iteration"],
            }
            self._transition(
                SessionState.SPEC_REFINING,
                SessionState.SPEC_SETTLED,
                {"terminal": "BudgetExhausted", "iterations": last["iteration"]},
                {"spec-final": self._artifact("spec-final", final)},
            )
            return

        target = self._target_record()
        previous = make_draft(target, last["text"])
        outcome = VerificationOutcome(
            status=OutcomeStatus(last["outcome"]["status"]),
            diagnostics=tuple(last["outcome"]["diagnostics"]),
            raw_output=last["outcome"]["raw_output"],
            exit_code=last["outcome"]["exit_code"],
        )
        refined = refine_draft(previous, outcome, self.client, self.config.prompt("spec_refine"))
        iteration = last["iteration"] + 1
        attempt = self._verify_attempt(refined, iteration)
        self._transition(
            SessionState.SPEC_REFINING,
            SessionState.SPEC_REFINING,
            {"iteration": iteration, "outcome": attempt["outcome"]["status"]},
            {f"spec-attempt-{iteration}": self._artifact(f"spec-attempt-{iteration}", attempt)},
        )

    def _stage_spec_settled(self) -> None:
        if not self.case.provided_tests():
            # patch generation is meaningless without failing tests to satisfy
            raise StageFailure(
                SessionState.SPEC_SETTLED, "no provided failing tests for patch generation"
            )
        plan = {
            "plain_attempts": self.config.budgets.plain_attempts,
            "mixed_attempts": self.config.budgets.mixed_attempts,
            "dedup": self.config.budgets.dedup,
        }
        self._transition(
            SessionState.SPEC_SETTLED,
            SessionState.PATCHING_PLAIN,
            plan,
            {"attempt-plan": self._artifact("attempt-plan", plan)},
        )

    def _failing_tests_text(self) -> str:
        failing, _ = test_excerpts(self.case, self.index())
        return failing

    def _stage_patching_plain(self) -> None:
        target = self._target_record()
        plan = self._get("attempt-plan")
        sink: dict[str, str] = {}

        def validator(candidate: CandidatePatch) -> bool:
            return self._judge_candidate(candidate, sink).plausible

        result = run_mode_attempts(
            self.case,
            target,
            None,
            OriginMode.PLAIN,
            plan["plain_attempts"],
            self.pristine(),
            self.client,
            validator,
            self.config.prompt("patch"),
            failing_tests_text=self._failing_tests_text(),
            dedup=plan["dedup"],
        )
        sink["attempt-log-plain"] = self._artifact(
            "attempt-log-plain", [_attempt_payload(r) for r in result.log]
        )
        if result.outcome is AttemptOutcome.FOUND:
            self._transition(
                SessionState.PATCHING_PLAIN,
                SessionState.VALIDATED,
                {"winner": result.winner.patch_id, "mode": "Plain"},
                sink,
            )
        else:
            self._transition(
                SessionState.PATCHING_PLAIN,
                SessionState.PATCHING_MIXED,
                {"plain_attempts": len(result.log)},
                sink,
            )

    def _settled_spec(self):
        final = self._get("spec-final")
        target = self._target_record()
        draft = make_draft(target, final["text"])
        status = SpecStatus(final["status"])
        return draft.spec.with_status(status) if draft.parsed_ok else draft.spec

    def _mixed_round(self) -> int:
        view = self.view
        return sum(1 for label in view.artifacts if label.startswith("attempt-log-mixed-"))

    def _prior_mixed_attempts(self) -> int:
        count = 0
        view = self.view
        for label, artifact_id in view.artifacts.items():
            if label.startswith("attempt-log-mixed-"):
                count += len(self.store.get_artifact(self.case.case_id, artifact_id))
        return count

    def _review_feedback(self) -> str:
        view = self.view
        for event in reversed(view.events):
            if event["type"] == "transition" and event["data"].get("review_action"):
                return event["data"].get("feedback", "")
        return ""

    def _stage_patching_mixed(self) -> None:
        target = self._target_record()
        plan = self._get("attempt-plan")
        spec = self._settled_spec()
        round_index = self._mixed_round() + 1

        if spec.status is SpecStatus.SYNTAX_ERROR or not spec.clauses:
            log_id = self._artifact(f"attempt-log-mixed-{round_index}", [])
            self._transition(
                SessionState.PATCHING_MIXED,
                SessionState.VALIDATED,
                {"skipped": "specification unusable for mixed mode"},
                {f"attempt-log-mixed-{round_index}": log_id},
            )
            return

        sink: dict[str, str] = {}

        def validator(candidate: CandidatePatch) -> bool:
            return self._judge_candidate(candidate, sink).plausible

        result = run_mode_attempts(
            self.case,
            target,
            spec,
            OriginMode.MIXED,
            plan["mixed_attempts"],
            self.pristine(),
            self.client,
            validator,
            self.config.prompt("patch"),
            failing_tests_text=self._failing_tests_text(),
            dedup=plan["dedup"],
            extra_context=self._review_feedback(),
            start_attempt=self._prior_mixed_attempts(),
        )
        sink[f"attempt-log-mixed-{round_index}"] = self._artifact(
            f"attempt-log-mixed-{round_index}", [_attempt_payload(r) for r in result.log]
        )
        data = {"mixed_attempts": len(result.log)}
        if result.outcome is AttemptOutcome.FOUND:
            data["winner"] = result.winner.patch_id
            data["mode"] = "Mixed"
        self._transition(
            SessionState.PATCHING_MIXED,
            SessionState.VALIDATED,
            data,
            sink,
        )

    def _candidate_ids(self) -> list[str]:
        view = self.view
        ids = []
        for label in view.artifacts:
            if label.startswith("candidate-"):
                ids.append(label[len("candidate-"):])
        return sorted(ids)

    def _stage_validated(self) -> None:
        # judge any candidate that lacks a verdict (e.g. a reviewer edit)
        sink: dict[str, str] = {}
        view = self.view
        for patch_id in self._candidate_ids():
            if f"verdict-{patch_id}" not in view.artifacts:
                payload = self._get(f"candidate-{patch_id}")
                self._judge_candidate(_candidate_from_payload(payload), sink)

        # the most recent designation (attempt-plan winner or reviewer edit)
        # outranks earlier ones; undesignated candidates trail in id order
        designated: list[str] = []
        for event in self.view.events:
            if event["type"] != "transition":
                continue
            patch_id = event["data"].get("winner") or (
                event["data"].get("patch_id")
                if event["data"].get("review_action") == "Edit"
                else None
            )
            if patch_id:
                designated.insert(0, patch_id)  # newest first
        known = self._candidate_ids()
        ordered = [pid for pid in dict.fromkeys(designated + known) if pid in known]
        verdicts = []
        plausible_id = None
        overfit = False
        for patch_id in ordered:
            label = f"verdict-{patch_id}"
            if label in sink:
                verdict = self.store.get_artifact(self.case.case_id, sink[label])
            else:
                verdict = self._get(label)
            verdicts.append(verdict)
            if verdict["plausible"] and plausible_id is None:
                plausible_id = patch_id
                overfit = verdict["overfit_suspected"]
        summary = {
            "plausible_patch_id": plausible_id,
            "overfit_suspected": overfit,
            "candidates": len(verdicts),
        }
        sink["review-summary"] = self._artifact("review-summary", summary)
        self._transition(
            SessionState.VALIDATED,
            SessionState.AWAITING_REVIEW,
            summary,
            sink,
        )

    # ---- review ---------------------------------------------------------

    def submit_review(self, decision: ReviewDecision) -> SessionState:
        view = self.view
        if view.state is not SessionState.AWAITING_REVIEW:
            raise WrongState(
                f"review submitted while session is {view.state.value}"
            )
        decided_at = decision.decided_at or self.clock.now()
        review_event = {
            "schema_version": SCHEMA_VERSION,
            "seq": view.seq + 1,
            "type": "review",
            "at": decided_at,
            "data": {
                "subject": decision.subject.value,
                "action": decision.action.value,
                "reviewer": decision.reviewer,
                "decided_at": decided_at,
                "new_text": decision.new_text,
            },
        }
        self.store.append_event(self.case.case_id, review_event)

        if decision.action is ReviewAction.ACCEPT:
            self._transition(
                SessionState.AWAITING_REVIEW,
                SessionState.CLOSED,
                {"outcome": ClosedOutcome.ACCEPTED.value, "review_action": "Accept"},
            )
        elif decision.action is ReviewAction.REJECT:
            if self.view.reject_rounds >= self.config.budgets.review_retry_rounds:
                self._transition(
                    SessionState.AWAITING_REVIEW,
                    SessionState.CLOSED,
                    {"outcome": ClosedOutcome.EXHAUSTED.value, "review_action": "Reject"},
                )
            else:
                self._transition(
                    SessionState.AWAITING_REVIEW,
                    SessionState.PATCHING_MIXED,
                    {
                        "review_action": "Reject",
                        "feedback": f"reviewer rejected the previous candidate: {decision.new_text}".strip(),
                    },
                )
        elif decision.subject is ReviewSubject.SPEC:
            draft = make_draft(self._target_record(), decision.new_text)
            final = {
                "text": decision.new_text,
                "status": draft.spec.status.value,
                "terminal": "ReviewerEdited",
                "iterations": 0,
            }
            self._transition(
                SessionState.AWAITING_REVIEW,
                SessionState.PATCHING_MIXED,
                {"review_action": "Edit", "subject": "Spec"},
                {"spec-final": self._artifact("spec-final", final)},
            )
        else:  # Edit(Patch)
            target = self._target_record()
            diff = decision.new_text
            try:
                apply_patch(self.pristine(), parse_unified_diff(diff))
            except Exception as exc:
                raise ValueError(f"edited patch does not apply: {exc}") from exc
            patch_id = f"edited-{view.seq + 1}"
            candidate = CandidatePatch(
                patch_id=patch_id,
                diff=diff,
                origin_mode=OriginMode.MIXED,
                attempt_index=self._prior_mixed_attempts(),
                target=target.ref,
            )
            artifact_id = self._artifact(f"candidate-{patch_id}", _candidate_payload(candidate))
            self._transition(
                SessionState.AWAITING_REVIEW,
                SessionState.VALIDATED,
                {"review_action": "Edit", "subject": "Patch", "patch_id": patch_id},
                {f"candidate-{patch_id}": artifact_id},
            )
        return self.state


# ---- payload helpers -----------------------------------------------------


def _ref_payload(ref: MethodRef) -> dict:
    return {
        "file_path": ref.file_path,
        "qualified_class": ref.qualified_class,
        "method_name": ref.method_name,
        "signature": ref.signature,
        "line_span": [ref.line_span.start, ref.line_span.end],
    }


def _span_from_payload(payload: dict):
    from respec.core.model import LineSpan

    span = payload.get("line_span", [1, 1])
    return LineSpan(span[0], span[1])


def _draft_payload(draft: SpecDraft) -> dict:
    return {
        "method": _ref_payload(draft.method.ref),
        "text": draft.text,
        "parsed_ok": draft.parsed_ok,
        "status": draft.spec.status.value,
        "diagnostics": [d.render() for d in draft.parse_diagnostics],
    }


def _attempt_payload(record) -> dict:
    return {
        "mode": record.mode.value,
        "attempt_index": record.attempt_index,
        "patch_id": record.patch_id,
        "plausible": record.plausible,
        "note": record.note,
    }


def _candidate_payload(candidate: CandidatePatch) -> dict:
    return {
        "patch_id": candidate.patch_id,
        "diff": candidate.diff,
        "origin_mode": candidate.origin_mode.value,
        "attempt_index": candidate.attempt_index,
        "target": _ref_payload(candidate.target),
    }


def _candidate_from_payload(payload: dict) -> CandidatePatch:
    target = payload["target"]
    return CandidatePatch(
        patch_id=payload["patch_id"],
        diff=payload["diff"],
        origin_mode=OriginMode(payload["origin_mode"]),
        attempt_index=payload["attempt_index"],
        target=MethodRef(
            target["file_path"],
            target["qualified_class"],
            target["method_name"],
            target["signature"],
            _span_from_payload(target),
        ),
    )


def _verdict_payload(verdict) -> dict:
    def suite(result):
        return {
            "status": result.status.value,
            "failed": [ref.test_id for ref in result.failed],
            "tests": [
                {"test": r.ref.test_id, "status": r.status.value, "log": r.log}
                for r in result.results
            ],
        }

    return {
        "patch_id": verdict.patch_id,
        "provided": suite(verdict.provided),
        "heldout": suite(verdict.heldout),
        "plausible": verdict.plausible,
        "overfit_suspected": verdict.overfit_suspected,
    }
