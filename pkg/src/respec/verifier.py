"""Verifier adapter: run an external JML verifier and classify its output.

The verifier is an external executable behind a command template (the real
engine is OpenJML; a scriptable mock ships in :mod:`respec.mock_verifier`
so the pipeline is testable without a JVM toolchain). A failed run is
classified as either a specification defect, to be repaired by refinement,
or a bug signal: the specification is fine and the code disagrees with it.
"""

from __future__ import annotations

import re
import shlex
import subprocess
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

from respec.index.model import MethodRecord
from respec.jml import SpecClause, SpecDiagnostic, render_jml


class OutcomeStatus(Enum):
    VERIFIED = "Verified"
    SPEC_DEFECT = "SpecDefect"
    BUG_SIGNAL = "BugSignal"
    TOOL_FAILURE = "ToolFailure"


@dataclass(frozen=True)
class VerificationOutcome:
    status: OutcomeStatus
    diagnostics: tuple[str, ...]
    raw_output: str
    exit_code: int


_SPEC_DEFECT_RE = re.compile(
    r"jml\s+(?:syntax|semantic|type)\s+error"
    r"|syntax error in (?:jml|specification)"
    r"|error:.*\bjml\b"
    r"|unknown clause keyword"
    r"|cannot find symbol in specification"
    r"|invalid (?:jml )?expression",
    re.IGNORECASE,
)
_BUG_SIGNAL_RE = re.compile(
    r"postcondition(?:\s+\S+)? (?:not established|might not hold|cannot be established)"
    r"|precondition .* not established"
    r"|\bverify:"
    r"|assertion might not hold"
    r"|invariant .* (?:not established|might not hold)"
    r"|exceptional postcondition",
    re.IGNORECASE,
)


def classify_verifier_output(
    raw_output: str,
    exit_code: int,
    lint: Sequence[SpecDiagnostic] = (),
) -> VerificationOutcome:
    """Total classification of a verifier run.

    Lint hits and JML parse/type errors mean the specification itself is
    defective; violation reports against a clean specification mean the
    code disagrees with it (a bug signal). Success exit with no errors is
    verified; anything else unrecognizable is a tool failure.
    """
    if lint:
        return VerificationOutcome(
            status=OutcomeStatus.SPEC_DEFECT,
            diagnostics=tuple(d.render() for d in lint),
            raw_output=raw_output,
            exit_code=exit_code,
        )
    lines = raw_output.splitlines()
    defect_lines = tuple(ln.strip() for ln in lines if _SPEC_DEFECT_RE.search(ln))
    signal_lines = tuple(ln.strip() for ln in lines if _BUG_SIGNAL_RE.search(ln))
    if defect_lines:
        return VerificationOutcome(OutcomeStatus.SPEC_DEFECT, defect_lines, raw_output, exit_code)
    if signal_lines:
        return VerificationOutcome(OutcomeStatus.BUG_SIGNAL, signal_lines, raw_output, exit_code)
    if exit_code == 0:
        return VerificationOutcome(OutcomeStatus.VERIFIED, (), raw_output, exit_code)
    return VerificationOutcome(
        OutcomeStatus.TOOL_FAILURE,
        (f"unrecognized verifier failure (exit {exit_code})",),
        raw_output,
        exit_code,
    )


def inline_spec_source(method: MethodRecord, clauses: Sequence[SpecClause]) -> str:
    """A single compilation-unit text: the JML block above the method source.

    A ``// target:`` marker names the method so scriptable verifiers can key
    their schedules; real verifiers ignore the comment.
    """
    block = render_jml(clauses)
    return (
        f"// target: {method.ref.qualified_name}\n"
        f"{block}\n"
        f"{method.source_text}\n"
    )


@dataclass
class SubprocessVerifier:
    """Runs a verifier command template against an inlined-spec Java file.

    The template must contain ``{file}``; ``{classpath}`` is substituted
    when configured. Timeout overruns are reported as tool failures, not
    exceptions, so the refinement loop can account for them.
    """

    command_template: str
    classpath: str = ""
    timeout: float = 60.0
    workdir: Path | None = None
    extra_placeholders: dict[str, str] = field(default_factory=dict)

    def run(self, java_file: Path) -> tuple[str, int]:
        values = {"file": str(java_file), "classpath": self.classpath}
        values.update(self.extra_placeholders)
        command = [part.format(**values) for part in shlex.split(self.command_template)]
        try:
            proc = subprocess.run(
                command,
                capture_output=True,
                text=True,
                timeout=self.timeout,
                cwd=str(self.workdir) if self.workdir else None,
            )
        except subprocess.TimeoutExpired:
            return (f"verifier timed out after {self.timeout}s", -1)
        except OSError as exc:
            return (f"verifier failed to start: {exc}", -1)
        return (proc.stdout + proc.stderr, proc.returncode)

    def verify(
        self,
        method: MethodRecord,
        clauses: Sequence[SpecClause],
        lint: Sequence[SpecDiagnostic],
        scratch_dir: Path,
    ) -> VerificationOutcome:
        scratch_dir.mkdir(parents=True, exist_ok=True)
        java_file = scratch_dir / f"{method.ref.qualified_class.rsplit('.', 1)[-1]}.java"
        java_file.write_text(inline_spec_source(method, clauses), encoding="utf-8")
        raw_output, exit_code = self.run(java_file)
        return classify_verifier_output(raw_output, exit_code, lint)
