"""Shared domain types and the unified-diff patch representation."""

from respec.core.diff import (
    ContextMismatch,
    FileDiff,
    Hunk,
    HunkLine,
    MalformedDiff,
    StructuredPatch,
    apply_patch,
    parse_unified_diff,
    render_unified_diff,
    reverse_patch,
)
from respec.core.model import (
    BugCase,
    BugCategory,
    CandidatePatch,
    LineSpan,
    MethodRef,
    OriginMode,
    TestKind,
    TestRef,
    bug_case_from_json,
    bug_case_to_json,
    load_cases,
    save_cases,
)

__all__ = [
    "BugCase",
    "BugCategory",
    "CandidatePatch",
    "ContextMismatch",
    "FileDiff",
    "Hunk",
    "HunkLine",
    "LineSpan",
    "MalformedDiff",
    "MethodRef",
    "OriginMode",
    "StructuredPatch",
    "TestKind",
    "TestRef",
    "apply_patch",
    "bug_case_from_json",
    "bug_case_to_json",
    "load_cases",
    "parse_unified_diff",
    "render_unified_diff",
    "reverse_patch",
    "save_cases",
]
