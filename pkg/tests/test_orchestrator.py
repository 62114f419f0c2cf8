"""Session state machine: stage paths, review edges, replay, crash safety."""

import shutil

import pytest

from helpers import FIXTURES
from respec.config import load_config
from respec.core.model import load_cases
from respec.gateway import GatewayPolicy
from respec.orchestrator import (
    DECLARED_EDGES,
    ClosedOutcome,
    ReviewAction,
    ReviewDecision,
    ReviewSubject,
    SessionState,
    StageFailure,
    UndeclaredTransition,
    WrongState,
    replay_events,
)
from respec.runner import build_context

CORPUS = FIXTURES / "minicorpus"


def corpus_context(tmp_path, policy=GatewayPolicy.REPLAY_ONLY, provider=None):
    config = load_config(CORPUS / "respec.json")
    transcripts = CORPUS / "transcripts"
    if policy is not GatewayPolicy.REPLAY_ONLY:
        # never record into the checked-in fixture store
        scratch = tmp_path / "transcripts"
        if not scratch.exists():
            shutil.copytree(transcripts, scratch)
        transcripts = scratch
    return build_context(config, tmp_path / "run", transcripts, policy, provider)


def corpus_case(case_id):
    for case in load_cases(CORPUS / "cases.json"):
        if case.case_id == case_id:
            return case
    raise KeyError(case_id)


def transitions(view):
    return [
        (event["from"], event["to"])
        for event in view.events
        if event["type"] == "transition"
    ]


class TestScriptedPaths:
    def test_plain_fix_path(self, tmp_path):
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-npe-1"))
        state = runner.run_to_review()
        assert state is SessionState.AWAITING_REVIEW
        assert transitions(runner.view) == [
            ("New", "Localized"),
            ("Localized", "ContextBuilt"),
            ("ContextBuilt", "SpecDrafted"),
            ("SpecDrafted", "SpecRefining"),
            ("SpecRefining", "SpecSettled"),
            ("SpecSettled", "PatchingPlain"),
            ("PatchingPlain", "Validated"),
            ("Validated", "AwaitingReview"),
        ]

    def test_mixed_fallback_path_with_refinement_loop(self, tmp_path):
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-logic-1"))
        runner.run_to_review()
        path = transitions(runner.view)
        assert ("SpecRefining", "SpecRefining") in path  # the @required typo iteration
        assert ("PatchingPlain", "PatchingMixed") in path  # plain attempts failed
        assert path[-1] == ("Validated", "AwaitingReview")
        summary = runner.store.get_artifact(
            "mini-logic-1", runner.view.artifacts["review-summary"]
        )
        assert summary["plausible_patch_id"]
        assert not summary["overfit_suspected"]

    def test_overfit_case_flags_summary(self, tmp_path):
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-str-1"))
        runner.run_to_review()
        summary = runner.store.get_artifact(
            "mini-str-1", runner.view.artifacts["review-summary"]
        )
        assert summary["plausible_patch_id"]
        assert summary["overfit_suspected"]

    def test_localization_without_known_method(self, tmp_path):
        """mini-idx-1 names no buggy method; the stack trace localizes it."""
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-idx-1"))
        runner.run_to_review()
        localization = runner.store.get_artifact(
            "mini-idx-1", runner.view.artifacts["localization"]
        )
        assert localization["from_case"] is False
        assert localization["method"]["method_name"] == "lastOf"
        assert localization["category"] == "IndexOutOfBound"

    def test_every_event_log_contains_only_declared_edges(self, tmp_path):
        context = corpus_context(tmp_path)
        for case in load_cases(CORPUS / "cases.json"):
            context.make_runner(case).run_to_review()
        for case_id in context.store.list_sessions():
            view = replay_events(case_id, context.store.read_events(case_id))
            for source, target in transitions(view):
                assert (SessionState(source), SessionState(target)) in DECLARED_EDGES


class TestAdvanceSemantics:
    def test_advance_executes_exactly_one_stage(self, tmp_path):
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-npe-1"))
        assert runner.state is SessionState.NEW
        assert runner.advance() is SessionState.LOCALIZED
        assert runner.advance() is SessionState.CONTEXT_BUILT
        assert len(transitions(runner.view)) == 2

    def test_advance_on_awaiting_review_is_wrong_state(self, tmp_path):
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-npe-1"))
        runner.run_to_review()
        with pytest.raises(WrongState):
            runner.advance()

    def test_spec_refining_with_verified_outcome_settles(self, tmp_path):
        runner = corpus_context(tmp_path).make_runner(corpus_case("mini-npe-1"))
        while runner.state is not SessionState.SPEC_REFINING:
            runner.advance()
        assert runner.advance() is SessionState.SPEC_SETTLED
        final = runner.store.get_artifact(
            "mini-npe-1", runner.view.artifacts["spec-final"]
        )
        assert final["terminal"] == "Verified"

    def test_missing_transcript_parks_the_step_not_the_process(self, tmp_path):
        """Gateway failures become stage failures; other sessions still run."""
        config = load_config(CORPUS / "respec.json")
        context = build_context(
            config, tmp_path / "run", tmp_path / "empty-store", GatewayPolicy.REPLAY_ONLY
        )
        runner = context.make_runner(corpus_case("mini-npe-1"))
        with pytest.raises(StageFailure) as err:
            runner.run_to_review()
        assert "gateway" in str(err.value)
        # parked at the stage that needed the model; earlier stages survived
        assert runner.state is SessionState.CONTEXT_BUILT
        failures = [e for e in runner.view.events if e["type"] == "failure"]
        assert failures and "gateway" in failures[0]["data"]["cause"]

    def test_stage_failure_leaves_state_and_logs(self, tmp_path):
        case = corpus_case("mini-npe-1")
        broken = type(case)(
            case_id="broken-1",
            project_root=case.project_root,
            report_text="no signal here",
            failing_tests=(),  # nothing to localize from
        )
        runner = corpus_context(tmp_path).make_runner(broken)
        with pytest.raises(StageFailure):
            runner.advance()
        view = runner.view
        assert view.state is SessionState.NEW
        failures = [e for e in view.events if e["type"] == "failure"]
        assert len(failures) == 1
        assert "localization" in failures[0]["data"]["cause"]


class CapturingProvider:
    """Returns one scripted patch; captures prompts for assertions."""

    def __init__(self, response):
        self.response = response
        self.prompts = []

    def generate(self, prompt):
        self.prompts.append(prompt)
        return self.response


GOOD_RANGE_PATCH = (
    "```java\n"
    "public static boolean inRange(int value, int lo, int hi) {\n"
    "    return value >= lo && value <= hi;\n"
    "}\n"
    "```\n"
)


class TestReview:
    def _reviewed_runner(self, tmp_path, case_id="mini-npe-1", **ctx):
        context = corpus_context(tmp_path, **ctx)
        runner = context.make_runner(corpus_case(case_id))
        runner.run_to_review()
        return runner

    def test_accept_closes_accepted(self, tmp_path):
        runner = self._reviewed_runner(tmp_path)
        state = runner.submit_review(
            ReviewDecision("mini-npe-1", ReviewSubject.PATCH, ReviewAction.ACCEPT, "dev")
        )
        assert state is SessionState.CLOSED
        assert runner.view.closed_outcome is ClosedOutcome.ACCEPTED

    def test_closed_session_never_transitions_again(self, tmp_path):
        runner = self._reviewed_runner(tmp_path)
        runner.submit_review(
            ReviewDecision("mini-npe-1", ReviewSubject.PATCH, ReviewAction.ACCEPT, "dev")
        )
        with pytest.raises(WrongState):
            runner.submit_review(
                ReviewDecision("mini-npe-1", ReviewSubject.PATCH, ReviewAction.ACCEPT, "dev")
            )
        with pytest.raises(WrongState):
            runner.advance()

    def test_reject_reenters_mixed_then_exhausts(self, tmp_path):
        provider = CapturingProvider(GOOD_RANGE_PATCH)
        runner = self._reviewed_runner(
            tmp_path, "mini-logic-1",
            policy=GatewayPolicy.RECORD_IF_MISSING, provider=provider,
        )
        state = runner.submit_review(
            ReviewDecision(
                "mini-logic-1", ReviewSubject.PATCH, ReviewAction.REJECT, "dev",
                new_text="still not right",
            )
        )
        assert state is SessionState.PATCHING_MIXED
        runner.run_to_review()
        assert runner.state is SessionState.AWAITING_REVIEW
        # retry budget (1 round) now spent: the next reject closes Exhausted
        state = runner.submit_review(
            ReviewDecision("mini-logic-1", ReviewSubject.PATCH, ReviewAction.REJECT, "dev")
        )
        assert state is SessionState.CLOSED
        assert runner.view.closed_outcome is ClosedOutcome.EXHAUSTED

    def test_reject_feedback_reaches_next_mixed_prompt(self, tmp_path):
        provider = CapturingProvider(GOOD_RANGE_PATCH)
        runner = self._reviewed_runner(
            tmp_path, "mini-logic-1",
            policy=GatewayPolicy.RECORD_IF_MISSING, provider=provider,
        )
        runner.submit_review(
            ReviewDecision(
                "mini-logic-1", ReviewSubject.PATCH, ReviewAction.REJECT, "dev",
                new_text="bounds must stay inclusive",
            )
        )
        runner.advance()  # PatchingMixed -> Validated via new attempt
        mixed_prompts = [p for p in provider.prompts if p.section("jml-specification")]
        assert mixed_prompts
        retry = mixed_prompts[0].section("retry-context") or ""
        assert "bounds must stay inclusive" in retry

    def test_edit_spec_text_feeds_next_mixed_prompt_verbatim(self, tmp_path):
        provider = CapturingProvider(GOOD_RANGE_PATCH)
        runner = self._reviewed_runner(
            tmp_path, "mini-logic-1",
            policy=GatewayPolicy.RECORD_IF_MISSING, provider=provider,
        )
        edited = (
            "/*@ requires lo <= hi;\n"
            "  @ensures \\result == (lo <= value && value <= hi);\n"
            "  @ensures lo > hi ==> !\\result;\n"
            "  @*/"
        )
        state = runner.submit_review(
            ReviewDecision(
                "mini-logic-1", ReviewSubject.SPEC, ReviewAction.EDIT, "dev",
                new_text=edited,
            )
        )
        assert state is SessionState.PATCHING_MIXED
        runner.advance()
        mixed_prompts = [p for p in provider.prompts if p.section("jml-specification")]
        assert mixed_prompts
        spec_section = mixed_prompts[-1].section("jml-specification")
        assert "lo > hi ==> !\\result" in spec_section

    def test_edit_patch_revalidates(self, tmp_path):
        runner = self._reviewed_runner(tmp_path, "mini-str-1")
        summary = runner.store.get_artifact(
            "mini-str-1", runner.view.artifacts["review-summary"]
        )
        assert summary["overfit_suspected"]
        # reviewer supplies the end-anchored ground-truth patch
        from respec.index import build_index
        from respec.patching import method_replacement_diff
        from respec.validation import read_snapshot

        index = build_index(CORPUS / "project")
        record = index.find_method("com.mini.codec.Phonetic", "normalizeSuffix")
        diff = method_replacement_diff(
            read_snapshot(CORPUS / "project"),
            record,
            "public static String normalizeSuffix(String txt) {\n"
            "    if (txt == null) {\n"
            "        return null;\n"
            "    }\n"
            "    return txt.replaceAll(\"mb$\", \"m2\");\n"
            "}\n",
        )
        state = runner.submit_review(
            ReviewDecision(
                "mini-str-1", ReviewSubject.PATCH, ReviewAction.EDIT, "dev", new_text=diff
            )
        )
        assert state is SessionState.VALIDATED
        runner.advance()
        assert runner.state is SessionState.AWAITING_REVIEW
        summary = runner.store.get_artifact(
            "mini-str-1", runner.view.artifacts["review-summary"]
        )
        assert summary["plausible_patch_id"].startswith("edited-")
        assert not summary["overfit_suspected"]

    def test_review_decisions_are_append_only(self, tmp_path):
        runner = self._reviewed_runner(tmp_path)
        runner.submit_review(
            ReviewDecision("mini-npe-1", ReviewSubject.PATCH, ReviewAction.ACCEPT, "alice")
        )
        decisions = runner.view.decisions
        assert len(decisions) == 1
        assert decisions[0]["reviewer"] == "alice"


class TestReplayValidation:
    def test_undeclared_transition_detected(self):
        events = [
            {"seq": 1, "type": "transition", "from": "New", "to": "Localized", "data": {}},
            {"seq": 2, "type": "transition", "from": "Localized", "to": "Validated", "data": {}},
        ]
        with pytest.raises(UndeclaredTransition):
            replay_events("bad", events)

    def test_inconsistent_source_detected(self):
        events = [
            {"seq": 1, "type": "transition", "from": "Localized", "to": "ContextBuilt", "data": {}},
        ]
        with pytest.raises(UndeclaredTransition):
            replay_events("bad", events)


class TestCrashRestart:
    def test_restart_between_any_two_transitions_reaches_same_terminal(self, tmp_path):
        reference = corpus_context(tmp_path / "ref").make_runner(corpus_case("mini-logic-1"))
        reference.run_to_review()
        reference_path = transitions(reference.view)
        total = len(reference.view.events)

        for cut in range(1, total):
            crash_dir = tmp_path / f"crash-{cut}"
            context = corpus_context(crash_dir)
            runner = context.make_runner(corpus_case("mini-logic-1"))
            # run until `cut` events, then "crash"
            while len(runner.view.events) < cut:
                runner.advance()
            # restart: a fresh runner over the same store resumes from the log
            resumed = corpus_context(crash_dir).make_runner(corpus_case("mini-logic-1"))
            resumed.run_to_review()
            assert resumed.state is SessionState.AWAITING_REVIEW
            assert transitions(resumed.view) == reference_path
