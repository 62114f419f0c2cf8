"""Index data types and their JSON persistence."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from respec.core.model import LineSpan, MethodRef

INDEX_VERSION = 1


class Visibility(Enum):
    PUBLIC = "Public"
    PROTECTED = "Protected"
    PACKAGE_PRIVATE = "PackagePrivate"
    PRIVATE = "Private"


def content_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True, slots=True)
class MethodRecord:
    ref: MethodRef
    visibility: Visibility
    source_text: str
    callee_names: tuple[str, ...]
    content_hash: str
    param_names: tuple[str, ...] = ()
    return_type: str = ""

    def __post_init__(self) -> None:
        if len(set(self.callee_names)) != len(self.callee_names):
            raise ValueError("callee_names must not contain duplicates")


@dataclass(frozen=True, slots=True)
class ApiEntry:
    library_id: str
    qualified_class: str
    member_signature: str


@dataclass(frozen=True)
class CodeIndex:
    """Immutable snapshot of a project's methods, call edges, and library API."""

    index_version: int
    project_fingerprint: str
    methods: dict[MethodRef, MethodRecord]
    api: tuple[ApiEntry, ...]
    call_edges: dict[MethodRef, tuple[MethodRef, ...]]
    built_at: str
    updated_at: str
    build_duration: float
    file_hashes: dict[str, str] = field(default_factory=dict)
    file_imports: dict[str, tuple[str, ...]] = field(default_factory=dict)
    api_pool: tuple[ApiEntry, ...] = ()
    # stat cache (size, mtime_ns) so staleness checks can skip re-hashing
    file_stats: dict[str, tuple[int, int]] = field(default_factory=dict)

    def find_method(
        self, qualified_class: str, method_name: str, signature: str | None = None
    ) -> MethodRecord | None:
        """Resolve a method by name, ignoring line spans; signature optional."""
        matches = [
            rec
            for ref, rec in self.methods.items()
            if ref.qualified_class == qualified_class and ref.method_name == method_name
        ]
        if signature is not None:
            exact = [m for m in matches if m.ref.signature == signature]
            if exact:
                matches = exact
        matches.sort(key=lambda m: (m.ref.file_path, m.ref.line_span.start))
        return matches[0] if matches else None

    def method_count(self) -> int:
        return len(self.methods)


def _ref_to_json(ref: MethodRef) -> dict:
    return {
        "file_path": ref.file_path,
        "qualified_class": ref.qualified_class,
        "method_name": ref.method_name,
        "signature": ref.signature,
        "line_span": [ref.line_span.start, ref.line_span.end],
    }


def _ref_from_json(data: dict) -> MethodRef:
    return MethodRef(
        file_path=data["file_path"],
        qualified_class=data["qualified_class"],
        method_name=data["method_name"],
        signature=data["signature"],
        line_span=LineSpan(data["line_span"][0], data["line_span"][1]),
    )


def _ref_key(ref: MethodRef) -> tuple:
    return (ref.file_path, ref.line_span.start, ref.qualified_class, ref.method_name, ref.signature)


def index_to_json(index: CodeIndex, include_volatile: bool = True) -> dict:
    """Serialize; include_volatile=False drops timestamps, durations, and
    stat caches so the payload is deterministic for a given tree."""
    methods = []
    for ref in sorted(index.methods, key=_ref_key):
        rec = index.methods[ref]
        methods.append(
            {
                "ref": _ref_to_json(ref),
                "visibility": rec.visibility.value,
                "source_text": rec.source_text,
                "callee_names": list(rec.callee_names),
                "content_hash": rec.content_hash,
                "param_names": list(rec.param_names),
                "return_type": rec.return_type,
            }
        )
    edges = []
    for src in sorted(index.call_edges, key=_ref_key):
        edges.append(
            {
                "from": _ref_to_json(src),
                "to": [_ref_to_json(t) for t in index.call_edges[src]],
            }
        )
    doc = {
        "index_version": index.index_version,
        "project_fingerprint": index.project_fingerprint,
        "methods": methods,
        "api": [
            {"library_id": e.library_id, "qualified_class": e.qualified_class,
             "member_signature": e.member_signature}
            for e in index.api
        ],
        "api_pool": [
            {"library_id": e.library_id, "qualified_class": e.qualified_class,
             "member_signature": e.member_signature}
            for e in index.api_pool
        ],
        "call_edges": edges,
        "file_hashes": dict(sorted(index.file_hashes.items())),
        "file_imports": {k: list(v) for k, v in sorted(index.file_imports.items())},
    }
    if include_volatile:
        doc["built_at"] = index.built_at
        doc["updated_at"] = index.updated_at
        doc["build_duration"] = index.build_duration
        doc["file_stats"] = {k: list(v) for k, v in sorted(index.file_stats.items())}
    return doc


def index_from_json(data: dict) -> CodeIndex:
    if data.get("index_version") != INDEX_VERSION:
        raise ValueError(f"unsupported index_version {data.get('index_version')}")
    methods: dict[MethodRef, MethodRecord] = {}
    for m in data["methods"]:
        ref = _ref_from_json(m["ref"])
        methods[ref] = MethodRecord(
            ref=ref,
            visibility=Visibility(m["visibility"]),
            source_text=m["source_text"],
            callee_names=tuple(m["callee_names"]),
            content_hash=m["content_hash"],
            param_names=tuple(m.get("param_names", [])),
            return_type=m.get("return_type", ""),
        )
    edges = {
        _ref_from_json(e["from"]): tuple(_ref_from_json(t) for t in e["to"])
        for e in data["call_edges"]
    }
    return CodeIndex(
        index_version=data["index_version"],
        project_fingerprint=data["project_fingerprint"],
        methods=methods,
        api=tuple(ApiEntry(**e) for e in data["api"]),
        call_edges=edges,
        built_at=data.get("built_at", ""),
        updated_at=data.get("updated_at", ""),
        build_duration=data.get("build_duration", 0.0),
        file_hashes=dict(data["file_hashes"]),
        file_imports={k: tuple(v) for k, v in data["file_imports"].items()},
        api_pool=tuple(ApiEntry(**e) for e in data.get("api_pool", [])),
        file_stats={k: (v[0], v[1]) for k, v in data.get("file_stats", {}).items()},
    )


def save_index_file(index: CodeIndex, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(index_to_json(index), indent=2, sort_keys=True) + "\n"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(payload, encoding="utf-8")
    tmp.replace(path)


def load_index_file(path: str | Path) -> CodeIndex:
    return index_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
