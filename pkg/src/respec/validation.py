"""Patch validation: run tests via external commands, judge plausibility,
flag suspected overfitting, and localize from failure logs.

Test execution is delegated to a configurable command template (one
invocation per test, ``{test}`` and ``{project}`` placeholders) so any
build tool can sit behind it. Held-out tests run only after a patch is
already plausible and never influence plausibility; a plausible patch that
fails them is flagged as suspected overfitting.
"""

from __future__ import annotations

import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from respec.core.diff import apply_patch, parse_unified_diff
from respec.core.model import BugCase, CandidatePatch, MethodRef, TestRef
from respec.index.model import CodeIndex

BUILD_FAILURE_EXIT = 2  # command-template convention


class TestStatus(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    TIMEOUT = "Timeout"


class SuiteStatus(Enum):
    ALL_PASS = "AllPass"
    FAILURES = "Failures"
    BUILD_FAILED = "BuildFailed"
    TIMEOUT = "Timeout"
    NOT_RUN = "NotRun"


@dataclass(frozen=True)
class TestResult:
    ref: TestRef
    status: TestStatus
    log: str


@dataclass(frozen=True)
class SuiteResult:
    status: SuiteStatus
    results: tuple[TestResult, ...] = ()
    log: str = ""

    @property
    def failed(self) -> tuple[TestRef, ...]:
        return tuple(r.ref for r in self.results if r.status is not TestStatus.PASS)

    def combined_log(self) -> str:
        parts = [self.log] if self.log else []
        parts.extend(r.log for r in self.results)
        return "\n".join(p for p in parts if p)


@dataclass(frozen=True)
class PatchVerdict:
    patch_id: str
    provided: SuiteResult
    heldout: SuiteResult
    plausible: bool
    overfit_suspected: bool

    def __post_init__(self) -> None:
        if self.plausible != (self.provided.status is SuiteStatus.ALL_PASS):
            raise ValueError("plausible must equal provided == AllPass")
        expected_overfit = self.plausible and self.heldout.status is SuiteStatus.FAILURES
        if self.overfit_suspected != expected_overfit:
            raise ValueError("overfit_suspected must equal plausible and held-out failures")


def make_verdict(patch_id: str, provided: SuiteResult, heldout: SuiteResult) -> PatchVerdict:
    """The one constructor for verdicts; encodes the plausibility invariants."""
    plausible = provided.status is SuiteStatus.ALL_PASS
    overfit = plausible and heldout.status is SuiteStatus.FAILURES
    return PatchVerdict(
        patch_id=patch_id,
        provided=provided,
        heldout=heldout,
        plausible=plausible,
        overfit_suspected=overfit,
    )


class BuildFailed(Exception):
    def __init__(self, log: str):
        super().__init__("build failed")
        self.log = log


@dataclass(frozen=True)
class TestCommand:
    """Rendered command templates plus execution limits."""

    test_command: str
    build_command: str = ""
    timeout: float = 60.0
    cwd: str = ""
    # per-test invocations may run concurrently only when the command
    # template is declared safe for it
    parallel_safe: bool = False

    def _argv(self, template: str, test_id: str, project: Path) -> list[str]:
        rendered = template.format(test=test_id, project=str(project))
        return shlex.split(rendered)


def write_snapshot(snapshot: dict[str, str], workdir: Path) -> Path:
    """Materialize a file map under workdir (wiping any previous content)."""
    if workdir.exists():
        shutil.rmtree(workdir)
    workdir.mkdir(parents=True)
    for rel, content in snapshot.items():
        target = workdir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
    return workdir


def read_snapshot(project_root: Path, suffixes: tuple[str, ...] = (".java",)) -> dict[str, str]:
    """Load project files into a file map (source files only)."""
    snapshot: dict[str, str] = {}
    root = Path(project_root)
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.suffix not in suffixes:
            continue
        rel = path.relative_to(root).as_posix()
        if any(part.startswith(".") for part in rel.split("/")):
            continue
        snapshot[rel] = path.read_text(encoding="utf-8")
    return snapshot


def run_tests(
    project_dir: Path,
    tests: list[TestRef],
    command: TestCommand,
    timeout_override: float | None = None,
) -> SuiteResult:
    """Run each test through the command template against project_dir.

    Raises nothing: build failures, timeouts, and failures all come back as
    a SuiteResult so callers can fold them into verdicts.
    """
    if not tests:
        return SuiteResult(SuiteStatus.ALL_PASS, ())
    timeout = timeout_override if timeout_override is not None else command.timeout
    cwd = command.cwd or None

    if command.build_command:
        argv = command._argv(command.build_command, "", project_dir)
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout, cwd=cwd
            )
        except subprocess.TimeoutExpired:
            return SuiteResult(SuiteStatus.BUILD_FAILED, (), "build timed out")
        if proc.returncode != 0:
            return SuiteResult(SuiteStatus.BUILD_FAILED, (), proc.stdout + proc.stderr)

    def run_one(ref: TestRef) -> tuple[TestResult, int]:
        argv = command._argv(command.test_command, ref.test_id, project_dir)
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout, cwd=cwd
            )
        except subprocess.TimeoutExpired:
            return TestResult(ref, TestStatus.TIMEOUT, f"timed out after {timeout}s"), 0
        log = proc.stdout + proc.stderr
        status = TestStatus.PASS if proc.returncode == 0 else TestStatus.FAIL
        return TestResult(ref, status, log), proc.returncode

    if command.parallel_safe and len(tests) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(4, len(tests))) as pool:
            outcomes = list(pool.map(run_one, tests))  # input order preserved
    else:
        outcomes = [run_one(ref) for ref in tests]

    results: list[TestResult] = []
    timed_out = False
    for result, returncode in outcomes:
        if returncode == BUILD_FAILURE_EXIT:
            return SuiteResult(SuiteStatus.BUILD_FAILED, tuple(results), result.log)
        results.append(result)
        if result.status is TestStatus.TIMEOUT:
            timed_out = True

    if timed_out:
        return SuiteResult(SuiteStatus.TIMEOUT, tuple(results))
    if any(r.status is not TestStatus.PASS for r in results):
        return SuiteResult(SuiteStatus.FAILURES, tuple(results))
    return SuiteResult(SuiteStatus.ALL_PASS, tuple(results))


def judge(
    patch: CandidatePatch,
    case: BugCase,
    pristine: dict[str, str],
    command: TestCommand,
    workdir: Path,
    provided_suite: list[TestRef] | None = None,
    heldout_sources: dict[str, str] | None = None,
    timeout_override: float | None = None,
) -> PatchVerdict:
    """Apply the patch, run provided tests, then held-out tests if plausible.

    Build failures become verdicts, not exceptions. Held-out test sources
    are merged into the snapshot only for the held-out run, so they can
    never leak into the provided phase.
    """
    patched = apply_patch(pristine, parse_unified_diff(patch.diff))
    provided = provided_suite if provided_suite is not None else list(case.provided_tests())
    project_dir = write_snapshot(patched, workdir)
    provided_result = run_tests(project_dir, provided, command, timeout_override)

    if provided_result.status is not SuiteStatus.ALL_PASS:
        return make_verdict(patch.patch_id, provided_result, SuiteResult(SuiteStatus.NOT_RUN))

    heldout_tests = list(case.held_out_tests())
    if not heldout_tests:
        return make_verdict(
            patch.patch_id, provided_result, SuiteResult(SuiteStatus.NOT_RUN)
        )
    heldout_snapshot = dict(patched)
    heldout_snapshot.update(heldout_sources or {})
    heldout_dir = write_snapshot(heldout_snapshot, workdir.parent / (workdir.name + "-heldout"))
    heldout_result = run_tests(heldout_dir, heldout_tests, command, timeout_override)
    return make_verdict(patch.patch_id, provided_result, heldout_result)


_STACK_FRAME_RE = re.compile(r"^\s*at\s+([\w$.]+)\.([\w$<>]+)\(([\w$.]+\.java):(\d+)\)")


@dataclass(frozen=True)
class _Frame:
    qualified_class: str
    method_name: str
    file_name: str
    line: int


def _parse_traces(failure_logs: str) -> list[list[_Frame]]:
    """Stack trace blocks, in order of appearance."""
    traces: list[list[_Frame]] = []
    current: list[_Frame] = []
    for line in failure_logs.splitlines():
        match = _STACK_FRAME_RE.match(line)
        if match:
            current.append(
                _Frame(match.group(1), match.group(2), match.group(3), int(match.group(4)))
            )
        elif current:
            traces.append(current)
            current = []
    if current:
        traces.append(current)
    return traces


def _is_test_class(qualified_class: str) -> bool:
    return qualified_class.rsplit(".", 1)[-1].endswith("Test")


def localize_from_failures(
    case: BugCase, index: CodeIndex, failure_logs: str
) -> list[MethodRef]:
    """Rank plausible buggy methods from failure logs.

    Order: frames of the deepest stack trace (top frame first), then
    methods named in assertion messages, then callees of the failing test
    bodies; deterministic tie-break by qualified name. Empty logs yield an
    empty ranking, in which case the case must name its buggy method.
    """
    ranked: list[MethodRef] = []
    seen: set[MethodRef] = set()

    def admit(ref: MethodRef) -> None:
        if ref not in seen and not _is_test_class(ref.qualified_class):
            seen.add(ref)
            ranked.append(ref)

    traces = _parse_traces(failure_logs)
    if traces:
        deepest = traces[-1]  # the last block is the innermost cause
        for frame in deepest:
            record = index.find_method(frame.qualified_class, frame.method_name)
            if record is not None:
                admit(record.ref)

    method_names = {ref.method_name: ref for ref in sorted(index.methods, key=str)}
    for line in failure_logs.splitlines():
        if "expected" not in line.lower() and "assert" not in line.lower():
            continue
        for token in re.findall(r"[A-Za-z_$][\w$]*", line):
            ref = method_names.get(token)
            if ref is not None:
                admit(ref)

    failing_callees: list[MethodRef] = []
    for test in case.provided_tests():
        record = index.find_method(test.qualified_class, test.test_name)
        if record is None:
            continue
        for target in index.call_edges.get(record.ref, ()):
            failing_callees.append(target)
    for ref in sorted(failing_callees, key=lambda r: (r.qualified_name, r.signature)):
        admit(ref)

    return ranked
