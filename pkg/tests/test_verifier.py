"""Verifier output classification and the scriptable mock verifier."""

import json
import sys

from helpers import FIXTURES, strip_leading_hyphens_record
from respec.jml import Severity, SpecDiagnostic, parse_jml
from respec.verifier import (
    OutcomeStatus,
    SubprocessVerifier,
    classify_verifier_output,
    inline_spec_source,
)


def test_parse_error_line_is_spec_defect():
    outcome = classify_verifier_output(
        "Widget.java:2: error: JML syntax error: unexpected token 'required'\n", 1
    )
    assert outcome.status is OutcomeStatus.SPEC_DEFECT
    assert outcome.diagnostics


def test_clean_exit_is_verified():
    outcome = classify_verifier_output("", 0)
    assert outcome.status is OutcomeStatus.VERIFIED
    assert outcome.diagnostics == ()


def test_lint_hits_dominate():
    lint = [SpecDiagnostic(Severity.SEMANTIC, "identifier 'x' unknown", 0, 1, 5)]
    outcome = classify_verifier_output("", 0, lint)
    assert outcome.status is OutcomeStatus.SPEC_DEFECT
    assert "identifier 'x' unknown" in outcome.diagnostics[0]


def test_postcondition_violation_is_bug_signal():
    outcome = classify_verifier_output(
        "Util.java:9: verify: postcondition not established (ensures \\result != null)\n", 1
    )
    assert outcome.status is OutcomeStatus.BUG_SIGNAL


def test_labeled_corpus_classification():
    """Hand-labeled corpus: classification must match >= 19/20 labels."""
    samples = json.loads((FIXTURES / "verifier_outputs.json").read_text())["samples"]
    assert len(samples) == 20
    hits = 0
    for sample in samples:
        outcome = classify_verifier_output(sample["output"], sample["exit_code"])
        if outcome.status.value == sample["label"]:
            hits += 1
    assert hits >= 19, f"only {hits}/20 labels matched"


def test_classification_is_total_and_deterministic():
    weird = ["", "???", "\x00garbage", "error", "exit", "a\nb\nc"]
    for text in weird:
        for code in (-9, 0, 1, 2, 137):
            first = classify_verifier_output(text, code)
            second = classify_verifier_output(text, code)
            assert first == second
            assert first.status in OutcomeStatus


class TestMockVerifier:
    def _verifier(self, tmp_path, schedule):
        schedule_file = tmp_path / "schedule.json"
        schedule_file.write_text(json.dumps(schedule))
        template = (
            f"{sys.executable} -m respec.mock_verifier "
            f"--schedule {schedule_file} --state-dir {tmp_path / 'state'} {{file}}"
        )
        return SubprocessVerifier(command_template=template, timeout=30.0)

    def test_schedule_replays_in_order(self, tmp_path):
        method = strip_leading_hyphens_record()
        clauses = parse_jml("/*@ requires str != null; @*/").clauses
        schedule = {
            "targets": {
                method.ref.qualified_name: ["specdefect:bad token", "bugsignal", "verified"]
            }
        }
        verifier = self._verifier(tmp_path, schedule)
        scratch = tmp_path / "scratch"
        statuses = [
            verifier.verify(method, clauses, [], scratch).status for _ in range(4)
        ]
        assert statuses == [
            OutcomeStatus.SPEC_DEFECT,
            OutcomeStatus.BUG_SIGNAL,
            OutcomeStatus.VERIFIED,
            OutcomeStatus.VERIFIED,  # last entry repeats
        ]

    def test_default_schedule_and_marker(self, tmp_path):
        method = strip_leading_hyphens_record()
        source = inline_spec_source(method, parse_jml("/*@ requires str != null; @*/").clauses)
        assert source.startswith("// target: org.apache.commons.cli.Util.stripLeadingHyphens")
        verifier = self._verifier(tmp_path, {"default": ["toolfailure"]})
        outcome = verifier.verify(method, [], [], tmp_path / "scratch")
        assert outcome.status is OutcomeStatus.TOOL_FAILURE
        assert outcome.exit_code == 2
