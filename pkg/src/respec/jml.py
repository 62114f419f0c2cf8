"""JML method specifications: parsing, rendering, and semantic linting.

Covers the clause subset the pipeline generates and refines: ``requires``,
``ensures``, ``assigns``, and ``signals``, with expressions kept as
validated text (balanced delimiters, token sanity) rather than typed ASTs.
``@assigns`` is accepted as an alias of the standard ``assignable``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from respec.core.model import MethodRef
    from respec.index.model import MethodRecord


class ClauseKind(Enum):
    REQUIRES = "requires"
    ENSURES = "ensures"
    ASSIGNS = "assigns"
    SIGNALS = "signals"


class Severity(Enum):
    SYNTAX = "Syntax"
    SEMANTIC = "Semantic"


class SpecStatus(Enum):
    DRAFT = "Draft"
    SYNTAX_ERROR = "SyntaxError"
    SEMANTIC_ERROR = "SemanticError"
    VERIFIED = "Verified"
    BUG_SIGNAL = "BugSignal"


_KEYWORD_RE = re.compile(r"(requires|ensures|assigns|assignable|signals)\b")
_WORD_RE = re.compile(r"[A-Za-z_$][\w$]*")
_SIGNALS_HEAD_RE = re.compile(r"^\(\s*([\w$.]+)(?:\s+([\w$]+))?\s*\)\s*(.*)$", re.DOTALL)
_KNOWN_THROWABLES = {"Throwable", "java.lang.Throwable"}


@dataclass(frozen=True, slots=True)
class SpecClause:
    kind: ClauseKind
    expression: str
    signals_exception: str | None = None

    def __post_init__(self) -> None:
        if self.kind is ClauseKind.SIGNALS:
            if not self.signals_exception:
                raise ValueError("signals clause requires an exception name")
        elif self.signals_exception is not None:
            raise ValueError(f"{self.kind.value} clause cannot carry an exception name")
        if not self.expression:
            raise ValueError("clause expression must be non-empty")


@dataclass(frozen=True, slots=True)
class SpecDiagnostic:
    severity: Severity
    message: str
    clause_index: int
    line: int
    column: int

    def render(self) -> str:
        return f"{self.severity.value}:{self.line}:{self.column}:{self.message}"


@dataclass(frozen=True)
class JmlSpecification:
    """A clause list attached to a method, with refinement provenance."""

    target: MethodRef
    clauses: tuple[SpecClause, ...] = field(default_factory=tuple)
    iteration: int = 0
    status: SpecStatus = SpecStatus.DRAFT

    def __post_init__(self) -> None:
        if self.iteration < 0:
            raise ValueError("iteration must be non-negative")

    def with_status(self, status: SpecStatus) -> JmlSpecification:
        return JmlSpecification(self.target, self.clauses, self.iteration, status)


@dataclass(frozen=True, slots=True)
class ParseResult:
    clauses: tuple[SpecClause, ...]
    diagnostics: tuple[SpecDiagnostic, ...]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _strip_comment_delimiters(text: str) -> list[tuple[int, str]]:
    """Reduce a JML comment block to (line_no, content) pairs."""
    lines: list[tuple[int, str]] = []
    for no, raw in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        line = raw.strip()
        if line.startswith("/*"):
            line = line[2:].lstrip()
        if line.endswith("*/"):
            line = line[:-2].rstrip()
        if line.startswith("//"):
            line = line[2:].lstrip()
        if line.startswith("@"):
            line = line[1:].lstrip()
        if line:
            lines.append((no, line))
    return lines


def _find_unquoted(text: str, char: str) -> int:
    """Index of `char` outside string/char literals, or -1."""
    in_string: str | None = None
    i = 0
    while i < len(text):
        c = text[i]
        if in_string:
            if c == "\\":
                i += 2
                continue
            if c == in_string:
                in_string = None
        elif c in ('"', "'"):
            in_string = c
        elif c == char:
            return i
        i += 1
    return -1


def _balance(text: str) -> int:
    """Net paren/bracket balance outside string literals (0 = balanced)."""
    pairs = {"(": 1, ")": -1, "[": 1, "]": -1}
    depth = 0
    in_string: str | None = None
    i = 0
    while i < len(text):
        c = text[i]
        if in_string:
            if c == "\\":
                i += 2
                continue
            if c == in_string:
                in_string = None
        elif c in ('"', "'"):
            in_string = c
        elif c in pairs:
            depth += pairs[c]
        i += 1
    return depth


class _OpenClause:
    """One clause accumulating text until its terminating semicolon."""

    def __init__(self, keyword: str, line: int, column: int, index: int):
        self.keyword = keyword
        self.parts: list[str] = []
        self.line = line
        self.column = column
        self.index = index

    def extend(self, fragment: str) -> None:
        fragment = fragment.strip()
        if fragment:
            self.parts.append(fragment)

    @property
    def text(self) -> str:
        return " ".join(self.parts).strip()


def parse_jml(text: str) -> ParseResult:
    """Parse a JML annotation comment into clauses or syntax diagnostics.

    Never raises on malformed input: unknown clause keywords, missing
    semicolons, and unbalanced delimiters are reported as ``Syntax``
    diagnostics alongside whatever clauses did parse.
    """
    clauses: list[SpecClause] = []
    diagnostics: list[SpecDiagnostic] = []
    current: _OpenClause | None = None
    attempt = 0  # ordinal of the clause being read, counting failed ones

    def close(acc: _OpenClause, terminated: bool) -> None:
        if not terminated:
            diagnostics.append(
                SpecDiagnostic(
                    Severity.SYNTAX,
                    f"'{acc.keyword}' clause is not terminated by ';'",
                    acc.index,
                    acc.line,
                    acc.column,
                )
            )
            return
        expr = acc.text
        if not expr:
            diagnostics.append(
                SpecDiagnostic(
                    Severity.SYNTAX, f"empty '{acc.keyword}' clause", acc.index, acc.line, acc.column
                )
            )
            return
        if _balance(expr) != 0:
            diagnostics.append(
                SpecDiagnostic(
                    Severity.SYNTAX,
                    f"unbalanced delimiters in '{acc.keyword}' clause",
                    acc.index,
                    acc.line,
                    acc.column,
                )
            )
            return
        keyword = "assigns" if acc.keyword == "assignable" else acc.keyword
        kind = ClauseKind(keyword)
        if kind is ClauseKind.SIGNALS:
            head = _SIGNALS_HEAD_RE.match(expr)
            if head is None:
                diagnostics.append(
                    SpecDiagnostic(
                        Severity.SYNTAX,
                        "signals clause must start with '(ExceptionType [name])'",
                        acc.index,
                        acc.line,
                        acc.column,
                    )
                )
                return
            exception, _, condition = head.groups()
            if not condition.strip():
                condition = "true"
            clauses.append(SpecClause(kind, condition.strip(), exception))
        else:
            clauses.append(SpecClause(kind, expr))

    def feed(fragment: str, line_no: int, column: int) -> None:
        nonlocal current, attempt
        fragment = fragment.strip()
        if not fragment or fragment == "@":
            return
        keyword = _KEYWORD_RE.match(fragment)
        if keyword is not None:
            if current is not None:
                close(current, terminated=False)
            current = _OpenClause(keyword.group(1), line_no, column, attempt)
            attempt += 1
            current.extend(fragment[keyword.end():])
        elif current is not None:
            current.extend(fragment)
        else:
            word = _WORD_RE.match(fragment)
            found = word.group(0) if word else fragment.split()[0]
            diagnostics.append(
                SpecDiagnostic(
                    Severity.SYNTAX,
                    f"unknown clause keyword '{found}'",
                    attempt,
                    line_no,
                    column,
                )
            )
            attempt += 1
            return
        # Close at the clause's semicolon; text after it starts a new segment.
        while current is not None:
            joined = current.text
            semi = _find_unquoted(joined, ";")
            if semi < 0:
                break
            tail = joined[semi + 1:].strip()
            current.parts = [joined[:semi]]
            close(current, terminated=True)
            current = None
            if tail:
                feed(tail, line_no, column)

    for line_no, content in _strip_comment_delimiters(text):
        feed(content, line_no, 1)
    if current is not None:
        close(current, terminated=False)

    return ParseResult(tuple(clauses), tuple(diagnostics))


def render_jml(clauses: Iterable[SpecClause]) -> str:
    """Render clauses as a JML comment block, one clause per line.

    Deterministic layout; ``parse_jml(render_jml(cs))`` yields ``cs``.
    """
    body: list[str] = []
    for clause in clauses:
        if clause.kind is ClauseKind.SIGNALS:
            text = f"signals ({clause.signals_exception} e) {clause.expression}"
        else:
            text = f"{clause.kind.value} {clause.expression}"
        body.append(f"{text.rstrip()};")
    if not body:
        return "/*@ @*/"
    lines = [f"/*@ {body[0]}"]
    lines.extend(f"  @{item}" for item in body[1:])
    lines.append("  @*/")
    return "\n".join(lines)


_IDENTIFIER_RE = re.compile(r"(?<![\w$.])([A-Za-z_$][\w$]*)")
_JML_BUILTIN_RE = re.compile(r"\\[A-Za-z_]\w*")
_EXPR_KEYWORDS = {"true", "false", "null", "this", "super", "new", "instanceof", "e"}


def _mask_strings(expr: str) -> str:
    out: list[str] = []
    in_string: str | None = None
    i = 0
    while i < len(expr):
        c = expr[i]
        if in_string:
            if c == "\\" and i + 1 < len(expr):
                out.append("  ")
                i += 2
                continue
            out.append(c if c == in_string else " ")
            if c == in_string:
                in_string = None
        else:
            if c in ('"', "'"):
                in_string = c
            out.append(c)
        i += 1
    return "".join(out)


def _find_bare_assignment(expr: str) -> int:
    """Offset of a lone '=' used where a boolean operator belongs, or -1."""
    masked = _mask_strings(expr)
    i = 0
    while i < len(masked):
        c = masked[i]
        if c == "=":
            prev = masked[i - 1] if i > 0 else ""
            nxt = masked[i + 1] if i + 1 < len(masked) else ""
            if prev in ("=", "!", "<", ">"):
                i += 1
            elif nxt in ("=", ">"):
                i += 2  # '==', '==>' or '=>'
            else:
                return i
        else:
            i += 1
    return -1


def lint_semantics(
    clauses: Iterable[SpecClause], method: "MethodRecord"
) -> list[SpecDiagnostic]:
    """Flag clause expressions that cannot refer to the target method.

    Rule classes: identifiers that are neither parameters nor read in the
    method body, ``\\result`` on a void method, signals exceptions that do
    not look throwable, and a bare ``=`` in a boolean position.
    """
    diagnostics: list[SpecDiagnostic] = []
    scope_tokens = set(_IDENTIFIER_RE.findall(_mask_strings(method.source_text)))
    scope_tokens.update(method.param_names)
    is_void = method.return_type.strip() == "void"

    for index, clause in enumerate(clauses):
        masked = _mask_strings(clause.expression)

        if clause.kind in (ClauseKind.REQUIRES, ClauseKind.ENSURES):
            col = _find_bare_assignment(clause.expression)
            if col >= 0:
                diagnostics.append(
                    SpecDiagnostic(
                        Severity.SEMANTIC,
                        "assignment '=' used in a boolean position (did you mean '==')",
                        index,
                        index + 1,
                        col + 1,
                    )
                )

        if is_void and "\\result" in masked:
            diagnostics.append(
                SpecDiagnostic(
                    Severity.SEMANTIC,
                    "\\result used but the method returns void",
                    index,
                    index + 1,
                    masked.index("\\result") + 1,
                )
            )

        if clause.kind is ClauseKind.SIGNALS:
            name = (clause.signals_exception or "").rsplit(".", 1)[-1]
            looks_throwable = (
                name.endswith("Exception")
                or name.endswith("Error")
                or name in _KNOWN_THROWABLES
                or clause.signals_exception in _KNOWN_THROWABLES
            )
            if not looks_throwable:
                diagnostics.append(
                    SpecDiagnostic(
                        Severity.SEMANTIC,
                        f"signals names '{clause.signals_exception}', "
                        "which does not look like a Throwable",
                        index,
                        index + 1,
                        1,
                    )
                )

        if clause.kind is ClauseKind.ASSIGNS:
            continue
        without_builtins = _JML_BUILTIN_RE.sub(" ", masked)
        for match in _IDENTIFIER_RE.finditer(without_builtins):
            name = match.group(1)
            if name in _EXPR_KEYWORDS or name in scope_tokens:
                continue
            if name[0].isupper():
                continue  # type-name heuristic: Double.parseDouble, Charsets.ISO_8859_1
            diagnostics.append(
                SpecDiagnostic(
                    Severity.SEMANTIC,
                    f"identifier '{name}' is neither a parameter nor read by the method",
                    index,
                    index + 1,
                    match.start() + 1,
                )
            )
    return diagnostics
