"""Domain types for repair cases: methods, tests, patches, and bug categories."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from respec import SCHEMA_VERSION


class TestKind(Enum):
    PROVIDED = "Provided"
    HELD_OUT = "HeldOut"


class OriginMode(Enum):
    PLAIN = "Plain"
    MIXED = "Mixed"


class BugCategory(Enum):
    """The 13 bug-type labels used by taxonomy reports."""

    LOGIC_ERROR = "LogicError"
    EDGE_CASE_HANDLING = "EdgeCaseHandling"
    NULL_POINTER = "NullPointer"
    INDEX_OUT_OF_BOUND = "IndexOutOfBound"
    EXCEPTION_NOT_THROWN = "ExceptionNotThrown"
    TYPE_ERROR = "TypeError"
    STRING_MANIPULATION = "StringManipulation"
    INFINITE_LOOP_OR_STACK_OVERFLOW = "InfiniteLoopOrStackOverflow"
    NEW_LINE_ERROR = "NewLineError"
    INTEGER_OVERFLOW = "IntegerOverflow"
    EOF_ERROR = "EofError"
    SUBCLASSING_ERROR = "SubclassingError"
    WRONG_EXCEPTION_THROWN = "WrongExceptionThrown"


@dataclass(frozen=True, slots=True)
class LineSpan:
    """Inclusive 1-based line range, matching compiler diagnostics."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 1 or self.end < self.start:
            raise ValueError(f"invalid line span {self.start}..{self.end}")

    def contains(self, line: int) -> bool:
        return self.start <= line <= self.end


def _check_relative(path: str) -> str:
    norm = path.replace("\\", "/")
    if norm.startswith("/") or any(part == ".." for part in norm.split("/")):
        raise ValueError(f"file path must be project-relative and normalized: {path!r}")
    return norm


@dataclass(frozen=True, slots=True)
class MethodRef:
    file_path: str
    qualified_class: str
    method_name: str
    signature: str
    line_span: LineSpan

    def __post_init__(self) -> None:
        object.__setattr__(self, "file_path", _check_relative(self.file_path))

    @property
    def qualified_name(self) -> str:
        return f"{self.qualified_class}.{self.method_name}"

    def display(self) -> str:
        return f"{self.qualified_name}({self.signature})"


@dataclass(frozen=True, slots=True)
class TestRef:
    qualified_class: str
    test_name: str
    kind: TestKind = TestKind.PROVIDED

    @property
    def test_id(self) -> str:
        return f"{self.qualified_class}#{self.test_name}"


@dataclass(frozen=True, slots=True)
class CandidatePatch:
    """A unified diff produced by one generation attempt."""

    patch_id: str
    diff: str
    origin_mode: OriginMode
    attempt_index: int
    target: MethodRef

    def __post_init__(self) -> None:
        if self.attempt_index < 0:
            raise ValueError("attempt_index must be non-negative")


@dataclass(frozen=True)
class BugCase:
    """One repair task: a project, its bug report, and the tests exposing it."""

    case_id: str
    project_root: str
    report_text: str
    failing_tests: tuple[TestRef, ...] = field(default_factory=tuple)
    buggy_method: MethodRef | None = None
    category: BugCategory | None = None

    def provided_tests(self) -> tuple[TestRef, ...]:
        return tuple(t for t in self.failing_tests if t.kind is TestKind.PROVIDED)

    def held_out_tests(self) -> tuple[TestRef, ...]:
        return tuple(t for t in self.failing_tests if t.kind is TestKind.HELD_OUT)


def _method_ref_to_json(ref: MethodRef) -> dict:
    return {
        "file_path": ref.file_path,
        "qualified_class": ref.qualified_class,
        "method_name": ref.method_name,
        "signature": ref.signature,
        "line_span": {"start": ref.line_span.start, "end": ref.line_span.end},
    }


def _method_ref_from_json(data: dict) -> MethodRef:
    span = data["line_span"]
    return MethodRef(
        file_path=data["file_path"],
        qualified_class=data["qualified_class"],
        method_name=data["method_name"],
        signature=data["signature"],
        line_span=LineSpan(span["start"], span["end"]),
    )


def bug_case_to_json(case: BugCase) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "case_id": case.case_id,
        "project_root": case.project_root,
        "report_text": case.report_text,
        "failing_tests": [
            {"qualified_class": t.qualified_class, "test_name": t.test_name, "kind": t.kind.value}
            for t in case.failing_tests
        ],
    }
    if case.buggy_method is not None:
        doc["buggy_method"] = _method_ref_to_json(case.buggy_method)
    if case.category is not None:
        doc["category"] = case.category.value
    return doc


def bug_case_from_json(data: dict) -> BugCase:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported bug case schema_version {version}")
    tests = tuple(
        TestRef(t["qualified_class"], t["test_name"], TestKind(t.get("kind", "Provided")))
        for t in data.get("failing_tests", [])
    )
    buggy = data.get("buggy_method")
    category = data.get("category")
    return BugCase(
        case_id=data["case_id"],
        project_root=data["project_root"],
        report_text=data.get("report_text", ""),
        failing_tests=tests,
        buggy_method=_method_ref_from_json(buggy) if buggy else None,
        category=BugCategory(category) if category else None,
    )


def load_cases(path: str | Path) -> list[BugCase]:
    """Load a versioned cases file; project roots resolve relative to the file."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported cases file schema_version {doc.get('schema_version')}")
    cases = []
    for raw in doc["cases"]:
        case = bug_case_from_json(raw)
        root = Path(case.project_root)
        if not root.is_absolute():
            case = BugCase(
                case_id=case.case_id,
                project_root=str((path.parent / root).resolve()),
                report_text=case.report_text,
                failing_tests=case.failing_tests,
                buggy_method=case.buggy_method,
                category=case.category,
            )
        cases.append(case)
    ids = [c.case_id for c in cases]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate case_id in cases file")
    return cases


def save_cases(cases: list[BugCase], path: str | Path) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "cases": [bug_case_to_json(c) for c in cases]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
