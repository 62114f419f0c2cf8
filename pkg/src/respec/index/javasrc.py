"""Tolerant Java source scanner.

Extracts method declarations, call names, and imports without requiring
compilable code: comments and literals are masked, braces are matched, and
anything that does not look like a declaration is skipped quietly. This is
deliberately name-level analysis, not symbol resolution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_MODIFIERS = {
    "public", "protected", "private", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile",
}
_NOT_METHOD_KEYWORDS = {
    "if", "for", "while", "switch", "catch", "try", "do", "else", "return",
    "new", "throw", "assert", "case", "break", "continue",
}
_TYPE_DECL_RE = re.compile(r"\b(class|interface|enum|record)\s+([\w$]+)")
_PACKAGE_RE = re.compile(r"^\s*package\s+([\w.]+)\s*;", re.MULTILINE)
_IMPORT_RE = re.compile(r"^\s*import\s+(?:static\s+)?([\w.]+(?:\.\*)?)\s*;", re.MULTILINE)
_CALL_RE = re.compile(r"([\w$]+(?:\s*\.\s*[\w$]+)*)\s*\(")
_ANNOTATION_RE = re.compile(r"@[\w$.]+(?:\s*\([^)]*\))?")


@dataclass(frozen=True, slots=True)
class ScannedMethod:
    class_name: str  # dotted nested name, no package
    method_name: str
    signature: str  # comma-joined parameter types
    param_names: tuple[str, ...]
    return_type: str
    visibility: str  # Public | Protected | PackagePrivate | Private
    start_line: int
    end_line: int
    source_text: str
    callee_names: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class ScannedFile:
    package: str
    imports: tuple[str, ...]
    methods: tuple[ScannedMethod, ...] = field(default_factory=tuple)


def mask_comments_and_literals(text: str) -> str:
    """Replace comments and string/char literals with spaces, keeping layout."""
    out = list(text)
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if c == "/" and nxt == "/":
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
        elif c == "/" and nxt == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (text[i] == "*" and i + 1 < n and text[i + 1] == "/"):
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                if i + 1 < n:
                    out[i + 1] = " "
                i += 2
        elif c in ('"', "'"):
            quote = c
            i += 1
            while i < n and text[i] != quote:
                if text[i] == "\\":
                    out[i] = " "
                    i += 1
                    if i < n and text[i] != "\n":
                        out[i] = " "
                    i += 1
                    continue
                if text[i] != "\n":
                    out[i] = " "
                i += 1
        i += 1
    return "".join(out)


def _line_of(offsets: list[int], pos: int) -> int:
    """1-based line number of a character offset (offsets = line starts)."""
    lo, hi = 0, len(offsets) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if offsets[mid] <= pos:
            lo = mid
        else:
            hi = mid - 1
    return lo + 1


def _split_params(params: str) -> list[str]:
    """Split a parameter list on top-level commas (generics-aware)."""
    parts: list[str] = []
    depth = 0
    start = 0
    for i, c in enumerate(params):
        if c in "<([":
            depth += 1
        elif c in ">)]":
            depth -= 1
        elif c == "," and depth == 0:
            parts.append(params[start:i])
            start = i + 1
    tail = params[start:]
    if tail.strip():
        parts.append(tail)
    return [p.strip() for p in parts if p.strip()]


def _parse_params(params: str) -> tuple[list[str], list[str]]:
    """Parameter type list and name list from a declaration's (...) text."""
    types: list[str] = []
    names: list[str] = []
    for part in _split_params(params):
        part = _ANNOTATION_RE.sub("", part).strip()
        part = re.sub(r"\bfinal\s+", "", part)
        tokens = part.rsplit(None, 1)
        if len(tokens) == 2:
            ptype, name = tokens
            # varargs / array suffixes stay with the type
            while name.startswith("..."):
                ptype += "..."
                name = name[3:]
            types.append(re.sub(r"\s+", " ", ptype.strip()))
            names.append(name.strip("[]"))
        elif tokens:
            types.append(tokens[0])
            names.append("")
    return types, names


_HEADER_RE = re.compile(
    r"^(?P<mods>(?:[\w]+\s+)*?)"
    r"(?:<[^<>]*(?:<[^<>]*>)?[^<>]*>\s+)?"  # optional type parameters
    r"(?P<ret>[\w$][\w$.\[\]]*(?:\s*<.*>)?(?:\s*\[\s*\])*)?"
    r"\s*(?P<name>[\w$]+)\s*$",
    re.DOTALL,
)


def _parse_header(header: str, class_name: str) -> tuple[str, str, str] | None:
    """Split 'modifiers return-type name' before the parameter list.

    Returns (visibility, return_type, method_name) or None when the text is
    not a method declaration.
    """
    header = _ANNOTATION_RE.sub(" ", header).strip()
    if not header or "=" in header:
        return None
    match = _HEADER_RE.match(header)
    if match is None:
        return None
    name = match.group("name")
    if name in _NOT_METHOD_KEYWORDS or name in _MODIFIERS:
        return None
    ret = (match.group("ret") or "").strip()
    mods_text = match.group("mods") or ""
    mods = mods_text.split()
    if any(m not in _MODIFIERS for m in mods):
        return None
    simple_class = class_name.rsplit(".", 1)[-1]
    if not ret:
        if name != simple_class:
            return None
        ret = ""  # constructor
    elif ret in _MODIFIERS:
        mods.append(ret)
        if name != simple_class:
            return None
        ret = ""
    if "private" in mods:
        visibility = "Private"
    elif "protected" in mods:
        visibility = "Protected"
    elif "public" in mods:
        visibility = "Public"
    else:
        visibility = "PackagePrivate"
    return visibility, re.sub(r"\s+", " ", ret), name


def _extract_callees(masked_body: str) -> tuple[str, ...]:
    names: set[str] = set()
    for match in _CALL_RE.finditer(masked_body):
        dotted = re.sub(r"\s+", "", match.group(1))
        before = masked_body[: match.start()].rstrip()
        if before.endswith("new"):
            # constructor call: record the constructed type's simple name
            names.add(dotted.rsplit(".", 1)[-1])
            continue
        head = dotted.split(".", 1)[0]
        if head in _NOT_METHOD_KEYWORDS or dotted in ("this", "super"):
            continue
        names.add(dotted)
    return tuple(sorted(names))


def scan_java_source(text: str) -> ScannedFile:
    """Scan one Java compilation unit for type and method declarations."""
    masked = mask_comments_and_literals(text)
    package_match = _PACKAGE_RE.search(masked)
    package = package_match.group(1) if package_match else ""
    imports = tuple(m.group(1) for m in _IMPORT_RE.finditer(masked))

    line_offsets = [0]
    for i, c in enumerate(text):
        if c == "\n":
            line_offsets.append(i + 1)

    methods: list[ScannedMethod] = []
    # (depth_of_body, dotted_class_name) for each enclosing type
    class_stack: list[tuple[int, str]] = []
    depth = 0
    segment_start = 0  # start of the current declaration-ish segment
    i = 0
    n = len(masked)
    while i < n:
        c = masked[i]
        if c == ";":
            if class_stack and depth == class_stack[-1][0]:
                # body-less declaration (interface/abstract method, stub file)
                _try_method(
                    text, masked, masked[segment_start:i], segment_start, i,
                    line_offsets, class_stack[-1][1], methods, has_body=False,
                )
            segment_start = i + 1
        elif c == "{":
            segment = masked[segment_start:i]
            type_decl = None
            for m in _TYPE_DECL_RE.finditer(segment):
                type_decl = m  # last type keyword before the brace wins
            if type_decl is not None:
                simple = type_decl.group(2)
                dotted = (
                    f"{class_stack[-1][1]}.{simple}" if class_stack else simple
                )
                class_stack.append((depth + 1, dotted))
            else:
                end = None
                if class_stack and depth == class_stack[-1][0]:
                    end = _try_method(
                        text, masked, segment, segment_start, i, line_offsets,
                        class_stack[-1][1], methods, has_body=True,
                    )
                if end is not None:
                    # jump just past the method's closing brace
                    i = end
                    segment_start = i
                    continue
            depth += 1
            segment_start = i + 1
        elif c == "}":
            depth -= 1
            if class_stack and depth < class_stack[-1][0]:
                class_stack.pop()
            segment_start = i + 1
        i += 1

    return ScannedFile(package=package, imports=imports, methods=tuple(methods))


def _match_brace(masked: str, open_pos: int) -> int:
    """Offset of the brace matching masked[open_pos] == '{', or -1."""
    depth = 0
    for i in range(open_pos, len(masked)):
        if masked[i] == "{":
            depth += 1
        elif masked[i] == "}":
            depth -= 1
            if depth == 0:
                return i
    return -1


def _try_method(
    text: str,
    masked: str,
    segment: str,
    segment_start: int,
    boundary_pos: int,
    line_offsets: list[int],
    class_name: str,
    out: list[ScannedMethod],
    has_body: bool,
) -> int | None:
    """Parse segment(+body) as a method declaration.

    Returns the offset just past the method's closing brace when a bodied
    method was recognized, None otherwise (including body-less matches,
    which are recorded but need no jump).
    """
    # the parameter list is the last balanced (...) group in the segment
    close_paren = segment.rfind(")")
    if close_paren < 0:
        return None
    rest = segment[close_paren + 1:].strip()
    if rest and not re.fullmatch(r"throws\s+[\w$.,\s]+", rest):
        return None
    depth = 0
    open_paren = -1
    for j in range(close_paren, -1, -1):
        if segment[j] == ")":
            depth += 1
        elif segment[j] == "(":
            depth -= 1
            if depth == 0:
                open_paren = j
                break
    if open_paren < 0:
        return None
    header = _parse_header(segment[:open_paren], class_name)
    if header is None:
        return None
    visibility, return_type, method_name = header
    param_types, param_names = _parse_params(segment[open_paren + 1: close_paren])

    if has_body:
        end_pos = _match_brace(masked, boundary_pos)
        if end_pos < 0:
            return None
        callees = _extract_callees(masked[boundary_pos + 1: end_pos])
    else:
        end_pos = boundary_pos
        callees = ()

    decl_offset = segment_start + (len(segment) - len(segment.lstrip()))
    out.append(
        ScannedMethod(
            class_name=class_name,
            method_name=method_name,
            signature=",".join(param_types),
            param_names=tuple(param_names),
            return_type=return_type or class_name.rsplit(".", 1)[-1],
            visibility=visibility,
            start_line=_line_of(line_offsets, decl_offset),
            end_line=_line_of(line_offsets, end_pos),
            source_text=text[decl_offset: end_pos + 1],
            callee_names=callees,
        )
    )
    return end_pos + 1 if has_body else None
