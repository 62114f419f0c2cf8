"""Acceptance criteria, one test per criterion, at pinned tolerances.

Run `pytest tests/test_acceptance.py -v` for one pass/fail line per
criterion (the conftest hook also prints ACCEPTANCE lines).
"""

import json
import random
import statistics
import sys
import time
from pathlib import Path

from click.testing import CliRunner
from hypothesis import given, settings, strategies as st

import corpusgen
from helpers import FIXTURES, listing, make_method, strip_leading_hyphens_record
from respec.cli import main as respec_cli
from respec.clock import FixedStepClock
from respec.gateway import GatewayClient, GatewayPolicy, TranscriptStore
from respec.index import build_index, indexes_equivalent, update_index
from respec.jml import ClauseKind, Severity, lint_semantics, parse_jml
from respec.orchestrator import DECLARED_EDGES, SessionState, replay_events
from respec.orchestrator.store import SessionStore
from respec.synthesis import RefinementBudget, Terminal, make_draft, refine_loop
from respec.taxonomy import aggregate, percentage_summary
from respec.validation import SuiteResult, SuiteStatus, make_verdict
from respec.verifier import SubprocessVerifier

CORPUS = FIXTURES / "minicorpus"


def test_jml_listing_fixtures():
    """Listing parse/lint verdicts match the fixture table exactly; < 1 s."""
    started = time.perf_counter()

    cli5 = parse_jml(listing("cli5_spec.jml"))
    assert cli5.ok
    kinds = [c.kind for c in cli5.clauses]
    assert kinds.count(ClauseKind.REQUIRES) == 1
    assert kinds.count(ClauseKind.ENSURES) == 3
    assert kinds.count(ClauseKind.ASSIGNS) == 1

    jackson = parse_jml(listing("jacksondatabind99_spec.jml"))
    syntax = [d for d in jackson.diagnostics if d.severity is Severity.SYNTAX]
    assert len(syntax) == 1 and "required" in syntax[0].message

    codec10 = parse_jml(listing("codec10_spec.jml"))
    syntax = [d for d in codec10.diagnostics if d.severity is Severity.SYNTAX]
    assert len(syntax) == 1 and "not terminated" in syntax[0].message
    # the unterminated clause is the second one (`@ensures \result != null`)
    assert syntax[0].line == 2

    codec17 = parse_jml(listing("codec17_spec.jml"))
    assert codec17.ok
    assert any(c.kind is ClauseKind.SIGNALS for c in codec17.clauses)

    cli3_method = make_method(
        "public static Number createNumber(String str) {\n"
        "    return Double.valueOf(Double.parseDouble(str));\n"
        "}\n",
        method_name="createNumber",
        return_type="Number",
    )
    cli3 = parse_jml(listing("cli3_fragment.jml"))
    assert cli3.ok
    semantic = [
        d
        for d in lint_semantics(cli3.clauses, cli3_method)
        if d.severity is Severity.SEMANTIC
    ]
    assert len(semantic) == 1 and "'='" in semantic[0].message

    assert time.perf_counter() - started < 1.0


def test_table2_reproduction_from_fixtures():
    """Aggregate + percentage over the checked-in records: exact paper values."""
    from respec.core.model import BugCategory

    data = json.loads((FIXTURES / "table2_records.json").read_text())
    records = [
        (BugCategory(r["category"]), r["fixed_plain"], r["fixed_ours"])
        for r in data["records"]
    ]
    table = aggregate(records)
    assert table.totals() == (257, 63, 75)
    logic = table.rows[0]
    assert (logic.total, logic.fixed_plain, logic.fixed_ours) == (145, 30, 34)
    assert percentage_summary(table) == (24.5, 29.2)


def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(Path(root).rglob("*"))
        if p.is_file()
    }


def test_end_to_end_replay_corpus(tmp_path):
    """Replayed `respec run` over the seeded corpus: plain fix, mixed-only
    fix, an overfit verdict, and byte-identical artifacts across two runs."""
    started = time.perf_counter()
    runner = CliRunner()
    outputs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        result = runner.invoke(
            respec_cli,
            [
                "run", str(CORPUS / "cases.json"),
                "--replay-dir", str(CORPUS / "transcripts"),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        outputs.append(result.output)
    assert outputs[0] == outputs[1]

    store = SessionStore(tmp_path / "run1")
    sessions = store.list_sessions()
    assert len(sessions) >= 5

    categories = set()
    plain_fixes = mixed_only_fixes = overfit_verdicts = 0
    for case_id in sessions:
        view = replay_events(case_id, store.read_events(case_id))
        assert view.state is SessionState.AWAITING_REVIEW
        localization = store.get_artifact(case_id, view.artifacts["localization"])
        categories.add(localization["category"])
        summary = store.get_artifact(case_id, view.artifacts["review-summary"])
        winner_mode = None
        plain_all_failed = False
        for event in view.events:
            if event["type"] != "transition":
                continue
            if event["data"].get("winner") == summary["plausible_patch_id"]:
                winner_mode = event["data"].get("mode")
            if (event["from"], event["to"]) == ("PatchingPlain", "PatchingMixed"):
                plain_all_failed = True
        if winner_mode == "Plain":
            plain_fixes += 1
        if winner_mode == "Mixed" and plain_all_failed:
            mixed_only_fixes += 1
        if summary["overfit_suspected"]:
            overfit_verdicts += 1
            verdict = store.get_artifact(
                case_id, view.artifacts[f"verdict-{summary['plausible_patch_id']}"]
            )
            assert verdict["heldout"]["status"] == "Failures"
            heldout_log = verdict["heldout"]["tests"][0]["log"]
            assert "mb123" in heldout_log  # the discriminating held-out input

    assert {"NullPointer", "StringManipulation", "IndexOutOfBound", "LogicError"} <= categories
    assert plain_fixes >= 1
    assert mixed_only_fixes >= 1
    assert overfit_verdicts >= 1

    assert _tree_bytes(tmp_path / "run1") == _tree_bytes(tmp_path / "run2")
    assert time.perf_counter() - started < 300.0


class _EchoProvider:
    def generate(self, prompt):
        return "/*@ requires str != null; @*/"


def _mock_verifier(tmp_path, outcomes):
    tmp_path.mkdir(parents=True, exist_ok=True)
    schedule = tmp_path / "schedule.json"
    schedule.write_text(json.dumps({"default": outcomes}))
    return SubprocessVerifier(
        command_template=(
            f"{sys.executable} -m respec.mock_verifier "
            f"--schedule {schedule} --state-dir {tmp_path / 'state'} {{file}}"
        ),
        timeout=30.0,
    )


def _refine_client(tmp_path):
    return GatewayClient(
        store=TranscriptStore(tmp_path / "transcripts"),
        policy=GatewayPolicy.RECORD_IF_MISSING,
        model_id="mock",
        provider=_EchoProvider(),
    )


def test_refinement_loop_bounds(tmp_path):
    """Exactly max_iterations with an always-failing verifier; exactly 3 with
    fail-twice-then-verify. Zero tolerance."""
    draft = make_draft(strip_leading_hyphens_record(), "/*@ requires str != null; @*/")

    always_failing = _mock_verifier(tmp_path / "always", ["specdefect:never good"])
    result = refine_loop(
        draft, always_failing, _refine_client(tmp_path / "always"),
        RefinementBudget(max_iterations=5),
        tmp_path / "always" / "scratch", "refine", clock=FixedStepClock(),
    )
    assert result.terminal is Terminal.BUDGET_EXHAUSTED
    assert result.iterations == 5

    fail_twice = _mock_verifier(
        tmp_path / "twice", ["specdefect:one", "specdefect:two", "verified"]
    )
    result = refine_loop(
        draft, fail_twice, _refine_client(tmp_path / "twice"),
        RefinementBudget(max_iterations=5),
        tmp_path / "twice" / "scratch", "refine", clock=FixedStepClock(),
    )
    assert result.terminal is Terminal.VERIFIED
    assert result.iterations == 3


def test_index_equivalence_and_incrementality(tmp_path):
    """20 random single-file edits: update == rebuild (timestamps excluded);
    median single-file update < 10% of full build wall time, 5-run medians."""
    root = tmp_path / "corpus"
    corpusgen.generate_corpus(root, files=200, seed=12345)

    build_times = []
    for _ in range(5):
        t0 = time.perf_counter()
        index = build_index(root)
        build_times.append(time.perf_counter() - t0)

    rng = random.Random(20260810)
    update_times = []
    for edit in range(20):
        rel = corpusgen.random_edit(root, rng)
        t0 = time.perf_counter()
        updated = update_index(index, [rel], root)
        update_times.append(time.perf_counter() - t0)
        rebuilt = build_index(root)
        assert indexes_equivalent(updated, rebuilt), f"divergence after edit {edit} ({rel})"
        index = updated

    median_build = statistics.median(build_times)  # 5 timed builds
    median_update = statistics.median(update_times)
    assert median_update < 0.10 * median_build, (
        f"update {median_update * 1000:.1f} ms vs build {median_build * 1000:.1f} ms"
    )


_suite = st.sampled_from(
    [SuiteStatus.ALL_PASS, SuiteStatus.FAILURES, SuiteStatus.BUILD_FAILED, SuiteStatus.TIMEOUT]
)


@settings(max_examples=200)
@given(provided=_suite, heldout=st.sampled_from(list(SuiteStatus)))
def test_verdict_logic_properties(provided, heldout):
    """plausible <=> provided AllPass; overfit <=> plausible and held-out failures."""
    verdict = make_verdict("p", SuiteResult(provided), SuiteResult(heldout))
    assert verdict.plausible == (provided is SuiteStatus.ALL_PASS)
    assert verdict.overfit_suspected == (
        verdict.plausible and heldout is SuiteStatus.FAILURES
    )


def test_state_machine_soundness(tmp_path):
    """Replaying every log from a full run finds zero undeclared transitions;
    crash-and-restart between any two transitions reaches the same terminal."""
    from respec.config import load_config
    from respec.core.model import load_cases
    from respec.runner import build_context

    config = load_config(CORPUS / "respec.json")

    def fresh_context(where):
        return build_context(config, where, CORPUS / "transcripts", GatewayPolicy.REPLAY_ONLY)

    cases = {c.case_id: c for c in load_cases(CORPUS / "cases.json")}
    context = fresh_context(tmp_path / "full")
    for case in cases.values():
        context.make_runner(case).run_to_review()

    # replaying every produced log must accept every transition
    for case_id in context.store.list_sessions():
        view = replay_events(case_id, context.store.read_events(case_id))
        for event in view.events:
            if event["type"] == "transition":
                edge = (SessionState(event["from"]), SessionState(event["to"]))
                assert edge in DECLARED_EDGES

    # fault injection over the richest path (refinement loop + mixed fallback)
    case = cases["mini-logic-1"]
    reference = fresh_context(tmp_path / "ref").make_runner(case)
    reference.run_to_review()
    reference_events = [
        (e["from"], e["to"]) for e in reference.view.events if e["type"] == "transition"
    ]
    total_events = len(reference.view.events)
    assert total_events >= 2

    for cut in range(1, total_events):
        crash_dir = tmp_path / f"cut{cut}"
        runner = fresh_context(crash_dir).make_runner(case)
        while len(runner.view.events) < cut:
            runner.advance()
        # "restart": a brand-new runner over the surviving store
        resumed = fresh_context(crash_dir).make_runner(case)
        resumed.run_to_review()
        assert resumed.state is SessionState.AWAITING_REVIEW
        resumed_events = [
            (e["from"], e["to"]) for e in resumed.view.events if e["type"] == "transition"
        ]
        assert resumed_events == reference_events, f"divergence after crash at event {cut}"
