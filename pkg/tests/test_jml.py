"""JML parsing, rendering, and semantic linting against the listing fixtures."""

from hypothesis import given, strategies as st

from helpers import listing, make_method, strip_leading_hyphens_record
from respec.jml import (
    ClauseKind,
    Severity,
    SpecClause,
    lint_semantics,
    parse_jml,
    render_jml,
)


class TestParseListings:
    def test_cli5_spec_is_clean(self):
        result = parse_jml(listing("cli5_spec.jml"))
        assert result.ok
        kinds = [c.kind for c in result.clauses]
        assert kinds.count(ClauseKind.REQUIRES) == 1
        assert kinds.count(ClauseKind.ENSURES) == 3
        assert kinds.count(ClauseKind.ASSIGNS) == 1
        assigns = [c for c in result.clauses if c.kind is ClauseKind.ASSIGNS]
        assert assigns[0].expression == "\\nothing"

    def test_jacksondatabind99_unknown_keyword(self):
        result = parse_jml(listing("jacksondatabind99_spec.jml"))
        assert not result.ok
        syntax = [d for d in result.diagnostics if d.severity is Severity.SYNTAX]
        assert len(syntax) == 1
        assert "required" in syntax[0].message
        assert syntax[0].line == 2
        # the other five clauses still parse
        assert len(result.clauses) == 5

    def test_codec10_unterminated_clause(self):
        result = parse_jml(listing("codec10_spec.jml"))
        assert not result.ok
        syntax = [d for d in result.diagnostics if d.severity is Severity.SYNTAX]
        assert len(syntax) == 1
        assert "not terminated" in syntax[0].message
        assert syntax[0].line == 2

    def test_codec17_spec_is_clean(self):
        result = parse_jml(listing("codec17_spec.jml"))
        assert result.ok
        signals = [c for c in result.clauses if c.kind is ClauseKind.SIGNALS]
        assert len(signals) == 1
        assert signals[0].signals_exception == "NullPointerException"
        assert signals[0].expression == "bytes == null"

    def test_double_slash_form(self):
        result = parse_jml("//@ requires x > 0;\n//@ ensures \\result >= x;\n")
        assert result.ok
        assert len(result.clauses) == 2


class TestRender:
    def test_empty_clause_list_minimal_block(self):
        assert render_jml([]) == "/*@ @*/"
        result = parse_jml(render_jml([]))
        assert result.ok and result.clauses == ()

    def test_cli5_expressions_rendered_verbatim(self):
        clauses = parse_jml(listing("cli5_spec.jml")).clauses
        block = render_jml(clauses)
        for expected in (
            "str != null",
            'str.startsWith("--") ==> \\result == str.substring(2, str.length())',
            'str.startsWith("-") ==> \\result == str.substring(1, str.length())',
            '!str.startsWith("-") ==> \\result == str',
            "\\nothing",
        ):
            assert expected in block


_identifier = st.builds(
    lambda head, rest: head + rest,
    st.sampled_from("abcdefghijklmnopqrstuvwxyz"),
    st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_", max_size=8),
)
_quoted = st.text(alphabet='abcXYZ019 ;().*^$-', max_size=10).map(lambda s: f'"{s}"')
_atom = st.one_of(
    _identifier,
    _quoted,
    st.just("\\result"),
    st.integers(min_value=0, max_value=999).map(str),
)


@st.composite
def _expressions(draw):
    parts = [draw(_atom)]
    for _ in range(draw(st.integers(min_value=0, max_value=3))):
        op = draw(st.sampled_from(["==", "!=", "&&", "||", "==>", "+", "<", ">="]))
        right = draw(_atom)
        if draw(st.booleans()):
            right = f"({right})"
        parts.append(f"{op} {right}")
    return " ".join(parts)


@st.composite
def _clauses(draw):
    kind = draw(st.sampled_from(list(ClauseKind)))
    if kind is ClauseKind.SIGNALS:
        exc = draw(st.sampled_from(["NullPointerException", "java.io.IOException", "IllegalStateException"]))
        return SpecClause(kind, draw(_expressions()), exc)
    if kind is ClauseKind.ASSIGNS:
        return SpecClause(kind, draw(st.sampled_from(["\\nothing", "this.value", "count"])))
    return SpecClause(kind, draw(_expressions()))


@given(st.lists(_clauses(), max_size=8))
def test_parse_render_round_trip(clauses):
    rendered = render_jml(clauses)
    result = parse_jml(rendered)
    assert result.ok, result.diagnostics
    assert list(result.clauses) == clauses


class TestLint:
    def test_listing3_clauses_clean_against_method(self):
        clauses = parse_jml(listing("cli5_spec.jml")).clauses
        diags = lint_semantics(clauses, strip_leading_hyphens_record())
        assert diags == []

    def test_unknown_identifier_flagged(self):
        clauses = parse_jml("/*@ ensures \\result == x; @*/").clauses
        diags = lint_semantics(clauses, strip_leading_hyphens_record())
        assert len(diags) == 1
        assert diags[0].severity is Severity.SEMANTIC
        assert "'x'" in diags[0].message

    def test_cli3_assignment_in_boolean_position(self):
        method = make_method(
            "public static Number createNumber(String str) {\n"
            "    return Double.valueOf(Double.parseDouble(str));\n"
            "}\n",
            method_name="createNumber",
            qualified_class="org.apache.commons.cli.TypeHandler",
            return_type="Number",
        )
        clauses = parse_jml(listing("cli3_fragment.jml")).clauses
        diags = lint_semantics(clauses, method)
        semantic = [d for d in diags if d.severity is Severity.SEMANTIC]
        assert len(semantic) == 1
        assert "'='" in semantic[0].message

    def test_result_on_void_method(self):
        method = make_method(
            "public void reset(String str) { this.value = str; }",
            method_name="reset",
            return_type="void",
        )
        clauses = parse_jml("/*@ ensures \\result != null; @*/").clauses
        diags = lint_semantics(clauses, method)
        assert any("void" in d.message for d in diags)

    def test_signals_non_throwable_name(self):
        clauses = parse_jml("/*@ signals (Widget e) str == null; @*/").clauses
        diags = lint_semantics(clauses, strip_leading_hyphens_record())
        assert any("Throwable" in d.message for d in diags)

    def test_every_diagnostic_cites_its_clause(self):
        clauses = parse_jml(
            "/*@ ensures \\result == zig;\n"
            "  @ ensures \\result.doubleValue() = 4;\n"
            "  @*/"
        ).clauses
        diags = lint_semantics(clauses, strip_leading_hyphens_record())
        by_index = {d.clause_index for d in diags}
        assert by_index == {0, 1}
        for d in diags:
            assert 0 <= d.clause_index < len(clauses)
