"""Specification drafting, the verify-classify-refine loop, and test generation.

Drafts JML specs for the buggy method and its depth-1 callees (callees
first, in name order, so the verifier has their contracts available), then
iterates: verify, classify the failure, and ask the model to repair the
spec until it verifies, the verifier signals a code bug, or the budget runs
out. Bug signals terminate refinement: the spec has captured the intent and
is handed to patch generation as-is.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence

from respec.clock import SYSTEM_CLOCK, Clock
from respec.core.model import BugCase, TestKind
from respec.gateway import GatewayClient
from respec.index.build import callees_of
from respec.index.model import CodeIndex, MethodRecord
from respec.jml import (
    JmlSpecification,
    SpecStatus,
    lint_semantics,
    parse_jml,
    render_jml,
)
from respec.verifier import OutcomeStatus, VerificationOutcome


class UnresolvedMethod(Exception):
    pass


@dataclass(frozen=True)
class RefinementBudget:
    max_iterations: int = 5
    wall_clock_limit: float = 300.0

    def __post_init__(self) -> None:
        if self.max_iterations <= 0 or self.wall_clock_limit <= 0:
            raise ValueError("budget values must be positive")


class VerifierRunner(Protocol):
    def verify(
        self,
        method: MethodRecord,
        clauses: Sequence,
        lint: Sequence,
        scratch_dir: Path,
    ) -> VerificationOutcome:
        """Run one verification attempt for the method/spec pair."""


@dataclass(frozen=True)
class SpecDraft:
    """One drafted spec: the verbatim block plus its parsed form."""

    method: MethodRecord
    text: str
    spec: JmlSpecification
    parse_diagnostics: tuple = ()

    @property
    def parsed_ok(self) -> bool:
        return not self.parse_diagnostics


class Terminal(Enum):
    VERIFIED = "Verified"
    BUG_SIGNAL = "BugSignal"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class SpecAttempt:
    iteration: int  # 1-based
    text: str
    spec: JmlSpecification
    outcome: VerificationOutcome


@dataclass(frozen=True)
class RefinementResult:
    spec: JmlSpecification
    text: str
    history: tuple[SpecAttempt, ...]
    terminal: Terminal

    @property
    def iterations(self) -> int:
        return len(self.history)


_JML_BLOCK_RE = re.compile(r"/\*\s*@.*?\*/", re.DOTALL)
_LINE_JML_RE = re.compile(r"^(?://@.*(?:\n|$))+", re.MULTILINE)


def extract_jml_block(response: str) -> str | None:
    """Pull the first JML comment block out of a model response."""
    match = _JML_BLOCK_RE.search(response)
    if match:
        return match.group(0)
    match = _LINE_JML_RE.search(response)
    if match:
        return match.group(0).rstrip("\n")
    return None


_CODE_BLOCK_RE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.DOTALL)


def extract_code_blocks(response: str) -> list[str]:
    return [m.group(1).strip("\n") for m in _CODE_BLOCK_RE.finditer(response)]


def resolve_target(case: BugCase, index: CodeIndex) -> MethodRecord:
    ref = case.buggy_method
    if ref is None:
        raise UnresolvedMethod(f"{case.case_id}: no buggy method known")
    record = index.find_method(ref.qualified_class, ref.method_name, ref.signature or None)
    if record is None:
        record = index.find_method(ref.qualified_class, ref.method_name)
    if record is None:
        raise UnresolvedMethod(f"{case.case_id}: {ref.display()} not in index")
    return record


def test_excerpts(case: BugCase, index: CodeIndex) -> tuple[str, str]:
    """(failing, passing) test source excerpts for prompts.

    Held-out tests never appear here: they are not part of the repair
    loop's visible context.
    """
    failing_parts: list[str] = []
    failing_names = set()
    test_classes = []
    for test in case.failing_tests:
        if test.kind is not TestKind.PROVIDED:
            continue
        failing_names.add((test.qualified_class, test.test_name))
        if test.qualified_class not in test_classes:
            test_classes.append(test.qualified_class)
        record = index.find_method(test.qualified_class, test.test_name)
        if record is not None:
            failing_parts.append(record.source_text)
        else:
            failing_parts.append(f"// {test.test_id} (source not found)")
    passing_parts: list[str] = []
    for qualified_class in test_classes:
        siblings = [
            rec
            for ref, rec in index.methods.items()
            if ref.qualified_class == qualified_class
            and ref.method_name.startswith("test")
            and (qualified_class, ref.method_name) not in failing_names
        ]
        siblings.sort(key=lambda r: r.ref.line_span.start)
        passing_parts.extend(rec.source_text for rec in siblings)
    return "\n\n".join(failing_parts), "\n\n".join(passing_parts)


def _draft_one(
    method: MethodRecord,
    case: BugCase,
    failing: str,
    passing: str,
    callee_sources: str,
    client: GatewayClient,
    task_template: str,
) -> SpecDraft:
    sections = [
        ("task", task_template),
        ("bug-report", case.report_text),
        ("failing-tests", failing),
        ("passing-tests", passing),
        ("method-source", method.source_text),
    ]
    if callee_sources:
        sections.append(("callee-methods", callee_sources))
    response = client.complete_sections(sections)
    block = extract_jml_block(response) or response
    return make_draft(method, block)


def make_draft(method: MethodRecord, text: str, iteration: int = 0) -> SpecDraft:
    result = parse_jml(text)
    status = SpecStatus.DRAFT if result.ok else SpecStatus.SYNTAX_ERROR
    spec = JmlSpecification(
        target=method.ref, clauses=result.clauses, iteration=iteration, status=status
    )
    return SpecDraft(method=method, text=text, spec=spec, parse_diagnostics=result.diagnostics)


def draft_specs(
    case: BugCase,
    index: CodeIndex,
    client: GatewayClient,
    task_template: str,
) -> tuple[SpecDraft, list[SpecDraft]]:
    """Draft a spec for the target method plus one per depth-1 callee.

    Callees are drafted first (name order breaks ties and recursion), the
    target last so its prompt can lean on the callee context.
    """
    target = resolve_target(case, index)
    callees = callees_of(index, target.ref, depth=1)
    failing, passing = test_excerpts(case, index)

    callee_drafts = [
        _draft_one(callee, case, failing, passing, "", client, task_template)
        for callee in callees
    ]
    callee_sources = "\n\n".join(c.source_text for c in callees)
    target_draft = _draft_one(
        target, case, failing, passing, callee_sources, client, task_template
    )
    return target_draft, callee_drafts


def verify_draft(
    draft: SpecDraft, verifier: VerifierRunner, scratch_dir: Path
) -> VerificationOutcome:
    """One verification attempt: parse and lint gate the external verifier."""
    if not draft.parsed_ok:
        # syntax errors never reach the external verifier
        return VerificationOutcome(
            status=OutcomeStatus.SPEC_DEFECT,
            diagnostics=tuple(d.render() for d in draft.parse_diagnostics),
            raw_output="",
            exit_code=0,
        )
    lint = lint_semantics(draft.spec.clauses, draft.method)
    if lint:
        return VerificationOutcome(
            status=OutcomeStatus.SPEC_DEFECT,
            diagnostics=tuple(d.render() for d in lint),
            raw_output="",
            exit_code=0,
        )
    return verifier.verify(draft.method, draft.spec.clauses, lint, scratch_dir)


def refine_draft(
    draft: SpecDraft,
    outcome: VerificationOutcome,
    client: GatewayClient,
    refine_template: str,
) -> SpecDraft:
    """Ask the model to repair a defective spec; prompt embeds it verbatim."""
    diagnostics_text = "\n".join(outcome.diagnostics) or outcome.raw_output
    response = client.complete_sections(
        [
            ("task", refine_template),
            ("method-source", draft.method.source_text),
            ("previous-specification", draft.text),
            ("verifier-diagnostics", diagnostics_text),
        ]
    )
    block = extract_jml_block(response) or response
    return make_draft(draft.method, block, iteration=draft.spec.iteration + 1)


def settle(draft: SpecDraft, outcome: VerificationOutcome) -> JmlSpecification | None:
    """Terminal spec for a terminal outcome, None when refinement continues."""
    if outcome.status is OutcomeStatus.VERIFIED:
        return draft.spec.with_status(SpecStatus.VERIFIED)
    if outcome.status is OutcomeStatus.BUG_SIGNAL:
        return draft.spec.with_status(SpecStatus.BUG_SIGNAL)
    return None


def refine_loop(
    draft: SpecDraft,
    verifier: VerifierRunner,
    client: GatewayClient,
    budget: RefinementBudget,
    scratch_dir: Path,
    refine_template: str,
    clock: Clock = SYSTEM_CLOCK,
) -> RefinementResult:
    """Verify-classify-refine until verified, bug-signalled, or out of budget.

    One iteration = one verification attempt. Every refinement prompt embeds
    the previous spec text verbatim plus at least one diagnostic message.
    """
    history: list[SpecAttempt] = []
    current = draft
    started = clock.monotonic()

    for iteration in range(1, budget.max_iterations + 1):
        outcome = verify_draft(current, verifier, scratch_dir)
        settled = settle(current, outcome)
        if settled is not None:
            history.append(SpecAttempt(iteration, current.text, settled, outcome))
            terminal = (
                Terminal.VERIFIED
                if settled.status is SpecStatus.VERIFIED
                else Terminal.BUG_SIGNAL
            )
            return RefinementResult(settled, current.text, tuple(history), terminal)

        history.append(SpecAttempt(iteration, current.text, current.spec, outcome))
        out_of_time = clock.monotonic() - started > budget.wall_clock_limit
        if iteration == budget.max_iterations or out_of_time:
            break
        current = refine_draft(current, outcome, client, refine_template)

    return RefinementResult(
        current.spec, current.text, tuple(history), Terminal.BUDGET_EXHAUSTED
    )


def generate_unit_tests(
    method: MethodRecord,
    spec: JmlSpecification,
    client: GatewayClient,
    task_template: str,
) -> list[str]:
    """Spec-augmented unit-test generation.

    The rendered spec rides along as its own prompt section (omitted when
    the spec has no clauses); returned blocks must name the method under
    test.
    """
    if spec.status is SpecStatus.SYNTAX_ERROR:
        raise ValueError("cannot generate tests from a spec with syntax errors")
    sections = [("task", task_template), ("method-source", method.source_text)]
    if spec.clauses:
        sections.append(("jml-specification", render_jml(spec.clauses)))
    response = client.complete_sections(sections)
    blocks = extract_code_blocks(response)
    return [b for b in blocks if method.ref.method_name in b]
