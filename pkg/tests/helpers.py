"""Shared test construction helpers."""

from pathlib import Path

from respec.core.model import LineSpan, MethodRef
from respec.index.model import MethodRecord, Visibility, content_digest

FIXTURES = Path(__file__).parent / "fixtures"


def listing(name: str) -> str:
    return (FIXTURES / "listings" / name).read_text(encoding="utf-8")


def make_method(
    source_text: str,
    method_name: str = "m",
    qualified_class: str = "com.example.Widget",
    signature: str = "String",
    param_names: tuple = ("str",),
    return_type: str = "String",
    file_path: str = "src/Widget.java",
    span: tuple = (1, 10),
) -> MethodRecord:
    ref = MethodRef(
        file_path=file_path,
        qualified_class=qualified_class,
        method_name=method_name,
        signature=signature,
        line_span=LineSpan(*span),
    )
    return MethodRecord(
        ref=ref,
        visibility=Visibility.PUBLIC,
        source_text=source_text,
        callee_names=(),
        content_hash=content_digest(source_text),
        param_names=param_names,
        return_type=return_type,
    )


STRIP_LEADING_HYPHENS = """\
public static String stripLeadingHyphens(String str) {
    if (str.startsWith("--")) {
        return str.substring(2, str.length());
    } else if (str.startsWith("-")) {
        return str.substring(1, str.length());
    }
    return str;
}
"""


def strip_leading_hyphens_record() -> MethodRecord:
    return make_method(
        STRIP_LEADING_HYPHENS,
        method_name="stripLeadingHyphens",
        qualified_class="org.apache.commons.cli.Util",
        signature="String",
        param_names=("str",),
        return_type="String",
        file_path="src/java/org/apache/commons/cli/Util.java",
        span=(30, 44),
    )
