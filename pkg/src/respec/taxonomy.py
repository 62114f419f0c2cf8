"""Bug-type classification and aggregated repair reports.

Classification is an explicit, auditable decision table (the original
category assignment was manual): exception-type triggers first, then
assertion-diff triggers, then report-text keywords, defaulting to
LogicError. Reports tabulate per-category totals against plain-mode and
mixed-mode fixes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from respec.core.model import BugCase, BugCategory


class TriggerSource(Enum):
    REPORT_TEXT = "ReportText"
    EXCEPTION_TYPE = "ExceptionType"
    ASSERTION_DIFF = "AssertionDiff"


@dataclass(frozen=True)
class CategoryRule:
    category: BugCategory
    triggers: tuple[tuple[TriggerSource, str], ...]


# decision order within each stage is the listed order; first match wins
EXCEPTION_RULES: tuple[CategoryRule, ...] = (
    CategoryRule(
        BugCategory.NULL_POINTER,
        ((TriggerSource.EXCEPTION_TYPE, r"NullPointerException"),),
    ),
    CategoryRule(
        BugCategory.INDEX_OUT_OF_BOUND,
        ((TriggerSource.EXCEPTION_TYPE, r"IndexOutOfBounds"),),
    ),
    CategoryRule(
        BugCategory.INFINITE_LOOP_OR_STACK_OVERFLOW,
        ((TriggerSource.EXCEPTION_TYPE, r"StackOverflowError"),),
    ),
    CategoryRule(
        BugCategory.EOF_ERROR,
        ((TriggerSource.EXCEPTION_TYPE, r"EOFException"),),
    ),
)

KEYWORD_RULES: tuple[CategoryRule, ...] = (
    CategoryRule(
        BugCategory.INFINITE_LOOP_OR_STACK_OVERFLOW,
        (
            (TriggerSource.REPORT_TEXT, r"infinite loop"),
            (TriggerSource.REPORT_TEXT, r"stack overflow"),
            (TriggerSource.REPORT_TEXT, r"\bhangs?\b"),
        ),
    ),
    CategoryRule(
        BugCategory.WRONG_EXCEPTION_THROWN,
        ((TriggerSource.REPORT_TEXT, r"wrong exception"),),
    ),
    CategoryRule(
        BugCategory.EXCEPTION_NOT_THROWN,
        (
            (TriggerSource.REPORT_TEXT, r"(?:exception|warning).{0,24}not thrown"),
            (TriggerSource.REPORT_TEXT, r"should (?:have )?(?:been )?thrown?\b"),
            (TriggerSource.REPORT_TEXT, r"no exception"),
        ),
    ),
    CategoryRule(
        BugCategory.INTEGER_OVERFLOW,
        (
            (TriggerSource.REPORT_TEXT, r"integer overflow"),
            (TriggerSource.REPORT_TEXT, r"\boverflow\b"),
        ),
    ),
    CategoryRule(
        BugCategory.NULL_POINTER,
        (
            (TriggerSource.REPORT_TEXT, r"null\s?pointer"),
            (TriggerSource.REPORT_TEXT, r"\bNPE\b"),
        ),
    ),
    CategoryRule(
        BugCategory.INDEX_OUT_OF_BOUND,
        (
            (TriggerSource.REPORT_TEXT, r"out of bounds?"),
            (TriggerSource.REPORT_TEXT, r"index out of"),
        ),
    ),
    CategoryRule(
        BugCategory.EOF_ERROR,
        (
            (TriggerSource.REPORT_TEXT, r"\bEOF\b"),
            (TriggerSource.REPORT_TEXT, r"end of file"),
        ),
    ),
    CategoryRule(
        BugCategory.NEW_LINE_ERROR,
        (
            (TriggerSource.REPORT_TEXT, r"new ?line"),
            (TriggerSource.REPORT_TEXT, r"line separator"),
            (TriggerSource.REPORT_TEXT, r"\\r\\n"),
        ),
    ),
    CategoryRule(
        BugCategory.SUBCLASSING_ERROR,
        (
            (TriggerSource.REPORT_TEXT, r"subclass"),
            (TriggerSource.REPORT_TEXT, r"inherit"),
        ),
    ),
    CategoryRule(
        BugCategory.TYPE_ERROR,
        (
            (TriggerSource.REPORT_TEXT, r"type error"),
            (TriggerSource.REPORT_TEXT, r"wrong type"),
            (TriggerSource.REPORT_TEXT, r"class ?cast"),
        ),
    ),
    CategoryRule(
        BugCategory.EDGE_CASE_HANDLING,
        (
            (TriggerSource.REPORT_TEXT, r"edge case"),
            (TriggerSource.REPORT_TEXT, r"corner case"),
            (TriggerSource.REPORT_TEXT, r"boundary"),
        ),
    ),
    CategoryRule(
        BugCategory.STRING_MANIPULATION,
        (
            (TriggerSource.REPORT_TEXT, r"string manipulation"),
            (TriggerSource.REPORT_TEXT, r"substring"),
            (TriggerSource.REPORT_TEXT, r"\bregex\b"),
        ),
    ),
)

DEFAULT_CATEGORY = BugCategory.LOGIC_ERROR

ALL_RULES: tuple[CategoryRule, ...] = EXCEPTION_RULES + KEYWORD_RULES + (
    CategoryRule(
        BugCategory.STRING_MANIPULATION,
        ((TriggerSource.ASSERTION_DIFF, "string-valued expected/actual differ"),),
    ),
    CategoryRule(
        BugCategory.NEW_LINE_ERROR,
        ((TriggerSource.ASSERTION_DIFF, "newline-only difference"),),
    ),
)

_ASSERT_DIFF_RE = re.compile(r"expected\s*:?\s*<(.*?)>\s+but was\s*:?\s*<(.*?)>", re.DOTALL)


def _is_scalar(value: str) -> bool:
    """Numbers, booleans, and null are not string-manipulation evidence."""
    stripped = value.strip()
    if stripped in ("true", "false", "null", "not null"):
        return True
    try:
        float(stripped)
        return True
    except ValueError:
        return False


def _assertion_diff_category(logs: str) -> BugCategory | None:
    match = _ASSERT_DIFF_RE.search(logs)
    if match is None:
        return None
    expected, actual = match.group(1), match.group(2)
    if expected == actual:
        return None
    if _is_scalar(expected) and _is_scalar(actual):
        return None
    strip_newlines = lambda s: s.replace("\r", "").replace("\n", "")
    if strip_newlines(expected) == strip_newlines(actual):
        return BugCategory.NEW_LINE_ERROR
    return BugCategory.STRING_MANIPULATION


def classify_bug_type(case: BugCase, failure_logs: str) -> BugCategory:
    """Total, deterministic category decision for one bug."""
    for rule in EXCEPTION_RULES:
        for _, pattern in rule.triggers:
            if re.search(pattern, failure_logs):
                return rule.category
    from_diff = _assertion_diff_category(failure_logs)
    if from_diff is not None:
        return from_diff
    for rule in KEYWORD_RULES:
        for _, pattern in rule.triggers:
            if re.search(pattern, case.report_text, re.IGNORECASE):
                return rule.category
    return DEFAULT_CATEGORY


# Table column order for reports
CATEGORY_ORDER: tuple[BugCategory, ...] = (
    BugCategory.LOGIC_ERROR,
    BugCategory.EDGE_CASE_HANDLING,
    BugCategory.NULL_POINTER,
    BugCategory.INDEX_OUT_OF_BOUND,
    BugCategory.EXCEPTION_NOT_THROWN,
    BugCategory.TYPE_ERROR,
    BugCategory.STRING_MANIPULATION,
    BugCategory.INFINITE_LOOP_OR_STACK_OVERFLOW,
    BugCategory.NEW_LINE_ERROR,
    BugCategory.INTEGER_OVERFLOW,
    BugCategory.EOF_ERROR,
    BugCategory.SUBCLASSING_ERROR,
    BugCategory.WRONG_EXCEPTION_THROWN,
)

CATEGORY_LABELS = {
    BugCategory.LOGIC_ERROR: "Logic error",
    BugCategory.EDGE_CASE_HANDLING: "Incorrect handling of edge cases",
    BugCategory.NULL_POINTER: "Null pointer",
    BugCategory.INDEX_OUT_OF_BOUND: "Index out of bound",
    BugCategory.EXCEPTION_NOT_THROWN: "Exception/Warning not thrown",
    BugCategory.TYPE_ERROR: "Type error",
    BugCategory.STRING_MANIPULATION: "String manipulation error",
    BugCategory.INFINITE_LOOP_OR_STACK_OVERFLOW: "Infinite loop / Stack overflow",
    BugCategory.NEW_LINE_ERROR: "New line-related error",
    BugCategory.INTEGER_OVERFLOW: "Integer overflow",
    BugCategory.EOF_ERROR: "EOF related error",
    BugCategory.SUBCLASSING_ERROR: "Subclassing error",
    BugCategory.WRONG_EXCEPTION_THROWN: "Wrong exception thrown",
}


@dataclass(frozen=True)
class ReportRow:
    category: BugCategory
    total: int
    fixed_plain: int
    fixed_ours: int

    def __post_init__(self) -> None:
        if self.fixed_plain > self.total or self.fixed_ours > self.total:
            raise ValueError("fixed counts cannot exceed the row total")


@dataclass(frozen=True)
class ReportTable:
    rows: tuple[ReportRow, ...]

    def totals(self) -> tuple[int, int, int]:
        return (
            sum(r.total for r in self.rows),
            sum(r.fixed_plain for r in self.rows),
            sum(r.fixed_ours for r in self.rows),
        )


class EmptyTable(Exception):
    pass


def aggregate(records: Iterable[tuple[BugCategory, bool, bool]]) -> ReportTable:
    """Tally (category, fixed_plain, fixed_ours) records into a table."""
    totals = {c: [0, 0, 0] for c in CATEGORY_ORDER}
    for category, fixed_plain, fixed_ours in records:
        bucket = totals[category]
        bucket[0] += 1
        bucket[1] += int(bool(fixed_plain))
        bucket[2] += int(bool(fixed_ours))
    rows = tuple(
        ReportRow(category, *totals[category]) for category in CATEGORY_ORDER
    )
    return ReportTable(rows)


def percentage_summary(table: ReportTable) -> tuple[float, float]:
    """(plain rate, mixed rate) as percentages rounded to one decimal."""
    total, plain, ours = table.totals()
    if total == 0:
        raise EmptyTable("no records aggregated")
    return (round(100.0 * plain / total, 1), round(100.0 * ours / total, 1))


def render_text(table: ReportTable) -> str:
    width = max(len(label) for label in CATEGORY_LABELS.values())
    lines = [f"{'Bug Type':<{width}}  {'# of bugs':>9}  {'Plain':>6}  {'Ours':>6}"]
    for row in table.rows:
        label = CATEGORY_LABELS[row.category]
        lines.append(
            f"{label:<{width}}  {row.total:>9}  {row.fixed_plain:>6}  {row.fixed_ours:>6}"
        )
    total, plain, ours = table.totals()
    lines.append(f"{'Total':<{width}}  {total:>9}  {plain:>6}  {ours:>6}")
    return "\n".join(lines)


def render_csv(table: ReportTable) -> str:
    lines = ["bug_type,total,fixed_plain,fixed_ours"]
    for row in table.rows:
        lines.append(
            f"{CATEGORY_LABELS[row.category]},{row.total},{row.fixed_plain},{row.fixed_ours}"
        )
    total, plain, ours = table.totals()
    lines.append(f"Total,{total},{plain},{ours}")
    return "\n".join(lines) + "\n"
