"""Candidate patch generation: plain-mode attempts first, mixed-mode fallback.

Prompts for the two modes are identical except that mixed mode adds exactly
one labeled section carrying the rendered JML specification, which keeps
the with/without-specification comparison auditable from transcripts.
Candidates are whole-method replacements converted to unified diffs against
the pristine snapshot; diversity at temperature 0 comes from the attempt
index and a summary of prior failures appended to the prompt.
"""

from __future__ import annotations

import difflib
import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from respec.core.diff import apply_patch, parse_unified_diff
from respec.core.model import BugCase, CandidatePatch, OriginMode
from respec.gateway import GatewayClient
from respec.index.model import MethodRecord
from respec.jml import JmlSpecification, SpecStatus, render_jml
from respec.synthesis import extract_code_blocks


class MissingSpec(Exception):
    pass


class NoCandidateFound(Exception):
    pass


@dataclass(frozen=True)
class PatchAttemptPlan:
    plain_attempts: int = 3
    mixed_attempts: int = 3
    dedup: bool = True

    def __post_init__(self) -> None:
        if self.plain_attempts <= 0 or self.mixed_attempts <= 0:
            raise ValueError("attempt budgets must be positive")


@dataclass(frozen=True)
class AttemptRecord:
    mode: OriginMode
    attempt_index: int
    patch_id: str
    plausible: bool
    note: str = ""


class AttemptOutcome(Enum):
    FOUND = "Found"
    EXHAUSTED = "Exhausted"


@dataclass(frozen=True)
class AttemptResult:
    outcome: AttemptOutcome
    winner: CandidatePatch | None
    log: tuple[AttemptRecord, ...]


def assemble_patch_prompt(
    case: BugCase,
    method: MethodRecord,
    spec: JmlSpecification | None,
    mode: OriginMode,
    task_template: str = "",
    failing_tests_text: str = "",
    attempt_index: int = 0,
    failure_summary: str = "",
) -> list[tuple[str, str]]:
    """Prompt sections for one generation attempt.

    Plain and Mixed differ by exactly the ``jml-specification`` section.
    """
    if mode is OriginMode.MIXED:
        if spec is None:
            raise MissingSpec("mixed mode requires a specification")
        if spec.status is SpecStatus.SYNTAX_ERROR:
            raise MissingSpec("mixed mode requires a spec without syntax errors")
    sections = [
        ("task", task_template),
        ("bug-description", case.report_text),
        ("buggy-method", method.source_text),
        ("failing-tests", failing_tests_text),
    ]
    if mode is OriginMode.MIXED:
        sections.append(("jml-specification", render_jml(spec.clauses)))
    if attempt_index > 0:
        sections.append(
            ("retry-context", f"attempt {attempt_index + 1}\n{failure_summary}".rstrip())
        )
    return sections


def _patch_id(case_id: str, mode: OriginMode, attempt_index: int, diff: str) -> str:
    digest = hashlib.sha256(
        f"{case_id}\x00{mode.value}\x00{attempt_index}\x00{diff}".encode("utf-8")
    ).hexdigest()
    return digest[:16]


def method_replacement_diff(
    pristine: dict[str, str], method: MethodRecord, replacement: str
) -> str | None:
    """Unified diff that swaps the method's line span for the replacement."""
    path = method.ref.file_path
    original = pristine.get(path)
    if original is None:
        return None
    old_lines = original.split("\n")
    if original.endswith("\n"):
        old_lines.pop()
    span = method.ref.line_span
    if span.end > len(old_lines):
        return None
    indent = ""
    original_decl = old_lines[span.start - 1]
    indent = original_decl[: len(original_decl) - len(original_decl.lstrip())]
    replacement_lines = [
        (indent + line if line.strip() else line) for line in replacement.split("\n")
    ]
    while replacement_lines and not replacement_lines[-1].strip():
        replacement_lines.pop()
    new_lines = old_lines[: span.start - 1] + replacement_lines + old_lines[span.end:]
    if new_lines == old_lines:
        return None
    diff = "".join(
        difflib.unified_diff(
            [ln + "\n" for ln in old_lines],
            [ln + "\n" for ln in new_lines],
            fromfile=f"a/{path}",
            tofile=f"b/{path}",
        )
    )
    return diff or None


def _normalize_block(block: str) -> str:
    """Strip the common indentation margin so re-indenting stays idempotent."""
    lines = block.split("\n")
    margins = [len(ln) - len(ln.lstrip()) for ln in lines if ln.strip()]
    margin = min(margins) if margins else 0
    return "\n".join(ln[margin:] if ln.strip() else ln for ln in lines)


def extract_candidates(
    response: str,
    case: BugCase,
    method: MethodRecord,
    pristine: dict[str, str],
    mode: OriginMode,
    attempt_index: int,
    dedup: bool = True,
    seen_diffs: set[str] | None = None,
) -> list[CandidatePatch]:
    """Fenced code blocks -> whole-method replacement diffs that apply cleanly."""
    blocks = extract_code_blocks(response)
    if not blocks:
        raise NoCandidateFound(f"{case.case_id}: response contained no code block")
    candidates: list[CandidatePatch] = []
    local_seen: set[str] = set() if seen_diffs is None else seen_diffs
    for block in blocks:
        diff = method_replacement_diff(pristine, method, _normalize_block(block))
        if diff is None:
            continue
        try:
            structured = parse_unified_diff(diff)
            apply_patch(pristine, structured)
        except Exception:
            continue  # a candidate that cannot apply cleanly is not a candidate
        if dedup and diff in local_seen:
            continue
        local_seen.add(diff)
        candidates.append(
            CandidatePatch(
                patch_id=_patch_id(case.case_id, mode, attempt_index, diff),
                diff=diff,
                origin_mode=mode,
                attempt_index=attempt_index,
                target=method.ref,
            )
        )
    return candidates


Validator = Callable[[CandidatePatch], bool]


def run_mode_attempts(
    case: BugCase,
    method: MethodRecord,
    spec: JmlSpecification | None,
    mode: OriginMode,
    attempts: int,
    pristine: dict[str, str],
    client: GatewayClient,
    validator: Validator,
    task_template: str,
    failing_tests_text: str = "",
    dedup: bool = True,
    extra_context: str = "",
    start_attempt: int = 0,
) -> AttemptResult:
    """Run up to `attempts` generation attempts in one mode.

    Every candidate is validated before the next attempt is issued; the
    first plausible candidate wins.
    """
    log: list[AttemptRecord] = []
    failure_summary = extra_context
    seen: set[str] = set()
    for offset in range(attempts):
        attempt_index = start_attempt + offset
        sections = assemble_patch_prompt(
            case, method, spec, mode, task_template,
            failing_tests_text, attempt_index, failure_summary,
        )
        response = client.complete_sections(sections)
        try:
            candidates = extract_candidates(
                response, case, method, pristine, mode, attempt_index,
                dedup=dedup, seen_diffs=seen if dedup else None,
            )
        except NoCandidateFound as exc:
            log.append(AttemptRecord(mode, attempt_index, "", False, str(exc)))
            continue
        if not candidates:
            log.append(
                AttemptRecord(mode, attempt_index, "", False, "no applicable candidate")
            )
            continue
        for candidate in candidates:
            plausible = validator(candidate)
            log.append(AttemptRecord(mode, attempt_index, candidate.patch_id, plausible))
            if plausible:
                return AttemptResult(AttemptOutcome.FOUND, candidate, tuple(log))
        failure_summary = (
            f"{extra_context}\nprevious candidates failed validation "
            f"({len(log)} so far); produce a different fix"
        ).strip()
    return AttemptResult(AttemptOutcome.EXHAUSTED, None, tuple(log))


def run_attempt_plan(
    case: BugCase,
    method: MethodRecord,
    spec: JmlSpecification | None,
    plan: PatchAttemptPlan,
    pristine: dict[str, str],
    client: GatewayClient,
    validator: Validator,
    task_template: str,
    failing_tests_text: str = "",
) -> AttemptResult:
    """Plain attempts first; only if all fail, mixed attempts with the spec."""
    plain = run_mode_attempts(
        case, method, None, OriginMode.PLAIN, plan.plain_attempts, pristine,
        client, validator, task_template, failing_tests_text, plan.dedup,
    )
    if plain.outcome is AttemptOutcome.FOUND:
        return plain
    usable_spec = spec is not None and spec.status is not SpecStatus.SYNTAX_ERROR
    if not usable_spec:
        return plain
    mixed = run_mode_attempts(
        case, method, spec, OriginMode.MIXED, plan.mixed_attempts, pristine,
        client, validator, task_template, failing_tests_text, plan.dedup,
    )
    return AttemptResult(mixed.outcome, mixed.winner, plain.log + mixed.log)
