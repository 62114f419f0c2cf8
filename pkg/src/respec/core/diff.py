"""Unified diff parsing, rendering, application, and reversal.

Diffs are the single patch interchange format of the pipeline: every
candidate patch is a unified diff against the session's pristine snapshot,
applied strictly (no fuzz) so validation always sees exactly the candidate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


class MalformedDiff(Exception):
    """Raised when headers and hunk bodies disagree."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ContextMismatch(Exception):
    """Raised when a hunk's context or removed lines disagree with the target."""

    def __init__(self, file_path: str, hunk_index: int, message: str):
        super().__init__(f"{file_path}, hunk {hunk_index + 1}: {message}")
        self.file_path = file_path
        self.hunk_index = hunk_index


@dataclass(frozen=True, slots=True)
class HunkLine:
    tag: str  # ' ', '+', or '-'
    text: str
    no_eol: bool = False  # '\ No newline at end of file' follows this line


@dataclass(frozen=True, slots=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[HunkLine, ...] = field(default_factory=tuple)


@dataclass(frozen=True, slots=True)
class FileDiff:
    old_path: str
    new_path: str
    hunks: tuple[Hunk, ...] = field(default_factory=tuple)

    @property
    def path(self) -> str:
        return self.new_path if self.old_path == "/dev/null" else self.old_path

    def added_removed(self) -> tuple[int, int]:
        added = sum(1 for h in self.hunks for ln in h.lines if ln.tag == "+")
        removed = sum(1 for h in self.hunks for ln in h.lines if ln.tag == "-")
        return added, removed


@dataclass(frozen=True, slots=True)
class StructuredPatch:
    files: tuple[FileDiff, ...] = field(default_factory=tuple)

    def is_empty(self) -> bool:
        return not self.files


_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


def _strip_header_path(raw: str) -> str:
    # "--- a/src/Foo.java\t2024-01-01" -> "src/Foo.java"
    path = raw.split("\t", 1)[0].strip()
    if path == "/dev/null":
        return path
    for prefix in ("a/", "b/"):
        if path.startswith(prefix):
            return path[len(prefix):]
    return path


def parse_unified_diff(text: str) -> StructuredPatch:
    """Parse unified diff text into a structured patch.

    Tolerates prelude lines (``diff --git``, ``index``) between file
    sections; raises :class:`MalformedDiff` when hunk bodies do not match
    the counts their ``@@`` headers declare.
    """
    if not text:
        raise MalformedDiff(0, "empty diff text")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    files: list[FileDiff] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if not line.startswith("--- "):
            i += 1
            continue
        old_path = _strip_header_path(line[4:])
        if i + 1 >= n or not lines[i + 1].startswith("+++ "):
            raise MalformedDiff(i + 2, "expected '+++' header after '---'")
        new_path = _strip_header_path(lines[i + 1][4:])
        i += 2

        hunks: list[Hunk] = []
        while i < n and lines[i].startswith("@@"):
            header = _HUNK_RE.match(lines[i])
            if header is None:
                raise MalformedDiff(i + 1, f"malformed hunk header {lines[i]!r}")
            old_start = int(header.group(1))
            old_len = int(header.group(2)) if header.group(2) is not None else 1
            new_start = int(header.group(3))
            new_len = int(header.group(4)) if header.group(4) is not None else 1
            header_line_no = i + 1
            i += 1

            body: list[HunkLine] = []
            old_count = new_count = 0
            while i < n and old_count + new_count < old_len + new_len:
                raw = lines[i]
                tag = raw[0] if raw else " "
                if tag not in (" ", "+", "-"):
                    break
                body.append(HunkLine(tag, raw[1:]))
                if tag in (" ", "-"):
                    old_count += 1
                if tag in (" ", "+"):
                    new_count += 1
                i += 1
                if i < n and lines[i].startswith("\\"):
                    body[-1] = HunkLine(body[-1].tag, body[-1].text, no_eol=True)
                    i += 1
            if old_count != old_len or new_count != new_len:
                raise MalformedDiff(
                    header_line_no,
                    f"hunk body has {old_count}/{new_count} lines, "
                    f"header declares {old_len}/{new_len}",
                )
            hunks.append(Hunk(old_start, old_len, new_start, new_len, tuple(body)))
        files.append(FileDiff(old_path, new_path, tuple(hunks)))

    if not files:
        raise MalformedDiff(1, "no file sections found")
    return StructuredPatch(tuple(files))


def render_unified_diff(patch: StructuredPatch) -> str:
    """Render a structured patch back to text; parse(render(p)) == p."""
    out: list[str] = []
    for fd in patch.files:
        old = fd.old_path if fd.old_path == "/dev/null" else f"a/{fd.old_path}"
        new = fd.new_path if fd.new_path == "/dev/null" else f"b/{fd.new_path}"
        out.append(f"--- {old}")
        out.append(f"+++ {new}")
        for hunk in fd.hunks:
            out.append(
                f"@@ -{hunk.old_start},{hunk.old_len} +{hunk.new_start},{hunk.new_len} @@"
            )
            for ln in hunk.lines:
                out.append(f"{ln.tag}{ln.text}")
                if ln.no_eol:
                    out.append("\\ No newline at end of file")
    return "\n".join(out) + "\n"


def _split_lines(content: str) -> tuple[list[str], bool]:
    """Split file content into lines plus a trailing-newline flag."""
    if content == "":
        return [], True
    ends_with_newline = content.endswith("\n")
    lines = content.split("\n")
    if ends_with_newline:
        lines.pop()
    return lines, ends_with_newline


def _join_lines(lines: list[str], trailing_newline: bool) -> str:
    if not lines:
        return ""
    body = "\n".join(lines)
    return body + "\n" if trailing_newline else body


def _apply_file_diff(content: str, fd: FileDiff) -> str:
    old_lines, had_newline = _split_lines(content)
    result: list[str] = []
    pos = 0  # 0-based cursor into old_lines
    trailing_newline = had_newline
    for hi, hunk in enumerate(fd.hunks):
        # For zero-length old ranges the start is the line the insertion follows.
        copy_until = hunk.old_start if hunk.old_len == 0 else hunk.old_start - 1
        if copy_until < pos or copy_until > len(old_lines):
            raise ContextMismatch(fd.path, hi, "hunk start outside file")
        result.extend(old_lines[pos:copy_until])
        pos = copy_until
        for ln in hunk.lines:
            if ln.tag == " ":
                if pos >= len(old_lines) or old_lines[pos] != ln.text:
                    found = old_lines[pos] if pos < len(old_lines) else "<eof>"
                    raise ContextMismatch(
                        fd.path, hi, f"context mismatch at line {pos + 1}: {found!r}"
                    )
                result.append(ln.text)
                pos += 1
            elif ln.tag == "-":
                if pos >= len(old_lines) or old_lines[pos] != ln.text:
                    found = old_lines[pos] if pos < len(old_lines) else "<eof>"
                    raise ContextMismatch(
                        fd.path, hi, f"removed line mismatch at line {pos + 1}: {found!r}"
                    )
                pos += 1
            else:
                result.append(ln.text)
                if ln.no_eol:
                    trailing_newline = False
    result.extend(old_lines[pos:])
    return _join_lines(result, trailing_newline)


def apply_patch(snapshot: dict[str, str], patch: StructuredPatch) -> dict[str, str]:
    """Apply a structured patch to a file map, returning a new file map.

    Pure: the input snapshot is never mutated. Only files named in the
    patch differ in the result.
    """
    result = dict(snapshot)
    for fd in patch.files:
        if fd.old_path == "/dev/null":
            if fd.new_path in result:
                raise ContextMismatch(fd.new_path, 0, "new file already exists")
            result[fd.new_path] = _apply_file_diff("", fd)
        elif fd.new_path == "/dev/null":
            if fd.old_path not in result:
                raise ContextMismatch(fd.old_path, 0, "file to delete not in snapshot")
            _apply_file_diff(result[fd.old_path], fd)  # verifies context
            del result[fd.old_path]
        else:
            if fd.old_path not in result:
                raise ContextMismatch(fd.old_path, 0, "file not in snapshot")
            result[fd.old_path] = _apply_file_diff(result[fd.old_path], fd)
            if fd.new_path != fd.old_path:
                result[fd.new_path] = result.pop(fd.old_path)
    return result


def reverse_patch(patch: StructuredPatch) -> StructuredPatch:
    """Invert a patch so applying it undoes the original."""
    flipped = {"+": "-", "-": "+", " ": " "}
    files = []
    for fd in patch.files:
        hunks = []
        for h in fd.hunks:
            lines = tuple(HunkLine(flipped[ln.tag], ln.text, ln.no_eol) for ln in h.lines)
            hunks.append(Hunk(h.new_start, h.new_len, h.old_start, h.old_len, lines))
        files.append(FileDiff(fd.new_path, fd.old_path, tuple(hunks)))
    return StructuredPatch(tuple(files))
