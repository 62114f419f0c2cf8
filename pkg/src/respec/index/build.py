"""Index construction, incremental update, and call-graph queries."""

from __future__ import annotations

import hashlib
import logging
from collections import deque
from pathlib import Path

from respec.clock import SYSTEM_CLOCK, Clock
from respec.core.model import LineSpan, MethodRef
from respec.index import javasrc
from respec.index.model import (
    INDEX_VERSION,
    ApiEntry,
    CodeIndex,
    MethodRecord,
    Visibility,
    content_digest,
    load_index_file,
    save_index_file,
)

logger = logging.getLogger(__name__)

INDEX_RELPATH = Path(".respec") / "index" / "index.json"


class NoSources(Exception):
    pass


class StaleIndex(Exception):
    pass


class UnknownMethod(Exception):
    pass


def _iter_java_files(root: Path) -> list[Path]:
    files = []
    for path in sorted(root.rglob("*.java")):
        if any(part.startswith(".") for part in path.relative_to(root).parts):
            continue
        files.append(path)
    return files


def _file_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fingerprint(file_hashes: dict[str, str]) -> str:
    joined = "\n".join(f"{path}:{digest}" for path, digest in sorted(file_hashes.items()))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def _stat_of(path: Path) -> tuple[int, int]:
    st = path.stat()
    return (st.st_size, st.st_mtime_ns)


def _scan_file(root: Path, rel_path: str) -> tuple[str, tuple[str, ...], list[MethodRecord]]:
    """Parse one file into (content digest, imports, method records)."""
    data = (root / rel_path).read_bytes()
    text = data.decode("utf-8", errors="replace")
    scanned = javasrc.scan_java_source(text)
    records = []
    for method in scanned.methods:
        qualified = (
            f"{scanned.package}.{method.class_name}" if scanned.package else method.class_name
        )
        ref = MethodRef(
            file_path=rel_path,
            qualified_class=qualified,
            method_name=method.method_name,
            signature=method.signature,
            line_span=LineSpan(method.start_line, method.end_line),
        )
        records.append(
            MethodRecord(
                ref=ref,
                visibility=Visibility(method.visibility),
                source_text=method.source_text,
                callee_names=method.callee_names,
                content_hash=content_digest(method.source_text),
                param_names=method.param_names,
                return_type=method.return_type,
            )
        )
    return _file_digest(data), scanned.imports, records


def _resolve_call_edges(
    methods: dict[MethodRef, MethodRecord],
) -> dict[MethodRef, tuple[MethodRef, ...]]:
    """Name-level callee resolution: all same-name candidates match."""
    by_simple_name: dict[str, list[MethodRef]] = {}
    for ref in methods:
        by_simple_name.setdefault(ref.method_name, []).append(ref)
    for refs in by_simple_name.values():
        refs.sort(key=lambda r: (r.qualified_class, r.signature, r.file_path, r.line_span.start))

    edges: dict[MethodRef, tuple[MethodRef, ...]] = {}
    for ref, record in methods.items():
        targets: list[MethodRef] = []
        seen = set()
        for callee in record.callee_names:
            simple = callee.rsplit(".", 1)[-1]
            for candidate in by_simple_name.get(simple, ()):
                if candidate != ref and candidate not in seen:
                    seen.add(candidate)
                    targets.append(candidate)
        targets.sort(key=lambda r: (r.qualified_class, r.method_name, r.signature, r.file_path))
        edges[ref] = tuple(targets)
    return edges


def _assemble(
    file_hashes: dict[str, str],
    file_imports: dict[str, tuple[str, ...]],
    file_methods: dict[str, list[MethodRecord]],
    file_stats: dict[str, tuple[int, int]],
    api_pool: tuple[ApiEntry, ...],
    built_at: str,
    updated_at: str,
    build_duration: float,
) -> CodeIndex:
    methods: dict[MethodRef, MethodRecord] = {}
    for rel in sorted(file_methods):
        for record in file_methods[rel]:
            methods[record.ref] = record
    imported = set()
    for imports in file_imports.values():
        imported.update(imports)
    api = _filter_api(api_pool, imported)
    return CodeIndex(
        index_version=INDEX_VERSION,
        project_fingerprint=_fingerprint(file_hashes),
        methods=methods,
        api=api,
        call_edges=_resolve_call_edges(methods),
        built_at=built_at,
        updated_at=updated_at,
        build_duration=build_duration,
        file_hashes=file_hashes,
        file_imports=file_imports,
        api_pool=api_pool,
        file_stats=file_stats,
    )


def _filter_api(pool: tuple[ApiEntry, ...], imported: set[str]) -> tuple[ApiEntry, ...]:
    """Restrict library entries to classes actually imported by the project."""
    wildcard_packages = {imp[:-2] for imp in imported if imp.endswith(".*")}
    exact = {imp for imp in imported if not imp.endswith(".*")}
    out = []
    for entry in pool:
        package = entry.qualified_class.rsplit(".", 1)[0] if "." in entry.qualified_class else ""
        if entry.qualified_class in exact or package in wildcard_packages:
            out.append(entry)
        else:
            # static imports name a member: com.ex.Lib.member
            owner = entry.qualified_class
            if any(imp.startswith(owner + ".") for imp in exact):
                out.append(entry)
    return tuple(sorted(set(out), key=lambda e: (e.library_id, e.qualified_class, e.member_signature)))


def _scan_dependency_dirs(dependency_dirs: list[Path]) -> tuple[ApiEntry, ...]:
    pool: list[ApiEntry] = []
    for dep_dir in dependency_dirs:
        dep_dir = Path(dep_dir)
        if not dep_dir.is_dir():
            logger.warning("dependency dir %s missing; contributing no API entries", dep_dir)
            continue
        library_id = dep_dir.name
        for java_file in sorted(dep_dir.rglob("*.java")):
            try:
                scanned = javasrc.scan_java_source(java_file.read_text("utf-8", errors="replace"))
            except Exception:  # tolerant: a broken stub never aborts the scan
                logger.warning("failed to scan dependency file %s", java_file)
                continue
            for method in scanned.methods:
                if method.visibility != "Public":
                    continue
                qualified = (
                    f"{scanned.package}.{method.class_name}"
                    if scanned.package
                    else method.class_name
                )
                ret = method.return_type or method.class_name.rsplit(".", 1)[-1]
                pool.append(
                    ApiEntry(
                        library_id=library_id,
                        qualified_class=qualified,
                        member_signature=f"{ret} {method.method_name}({method.signature})",
                    )
                )
    return tuple(sorted(set(pool), key=lambda e: (e.library_id, e.qualified_class, e.member_signature)))


def build_index(
    project_root: str | Path,
    dependency_dirs: list[Path] | None = None,
    clock: Clock = SYSTEM_CLOCK,
) -> CodeIndex:
    """Build a full index of every parseable method under project_root.

    Files that fail to parse are skipped with a logged diagnostic; the build
    never aborts on them. Raises :class:`NoSources` when the tree contains
    no Java files at all.
    """
    root = Path(project_root)
    started = clock.monotonic()
    built_at = clock.now()
    files = _iter_java_files(root)
    if not files:
        raise NoSources(f"no Java sources under {root}")

    file_hashes: dict[str, str] = {}
    file_imports: dict[str, tuple[str, ...]] = {}
    file_methods: dict[str, list[MethodRecord]] = {}
    file_stats: dict[str, tuple[int, int]] = {}
    for path in files:
        rel = path.relative_to(root).as_posix()
        try:
            stat = _stat_of(path)
            digest, imports, records = _scan_file(root, rel)
        except OSError as exc:
            logger.warning("skipping %s: %s", rel, exc)
            continue
        except Exception as exc:
            logger.warning("parse failure in %s (skipped): %s", rel, exc)
            continue
        file_hashes[rel] = digest
        file_imports[rel] = imports
        file_methods[rel] = records
        file_stats[rel] = stat

    api_pool = _scan_dependency_dirs([Path(d) for d in dependency_dirs or []])
    duration = clock.monotonic() - started
    return _assemble(
        file_hashes, file_imports, file_methods, file_stats, api_pool,
        built_at, built_at, duration,
    )


def update_index(
    index: CodeIndex,
    changed_files: list[str],
    project_root: str | Path,
    clock: Clock = SYSTEM_CLOCK,
) -> CodeIndex:
    """Re-index only changed_files, reusing untouched records verbatim.

    changed_files are project-relative paths; deleted files are allowed.
    Raises :class:`StaleIndex` when a file outside changed_files no longer
    matches the hash the index recorded for it.
    """
    root = Path(project_root)
    changed = {Path(f).as_posix() for f in changed_files}

    for rel, recorded in index.file_hashes.items():
        if rel in changed:
            continue
        path = root / rel
        if not path.is_file():
            raise StaleIndex(f"{rel} disappeared but is not in changed_files")
        # stat fast path; hash only when size/mtime moved
        if index.file_stats.get(rel) == _stat_of(path):
            continue
        if _file_digest(path.read_bytes()) != recorded:
            raise StaleIndex(f"{rel} changed on disk but is not in changed_files")

    if not changed:
        return CodeIndex(
            index_version=index.index_version,
            project_fingerprint=index.project_fingerprint,
            methods=index.methods,
            api=index.api,
            call_edges=index.call_edges,
            built_at=index.built_at,
            updated_at=clock.now(),
            build_duration=index.build_duration,
            file_hashes=index.file_hashes,
            file_imports=index.file_imports,
            api_pool=index.api_pool,
            file_stats=index.file_stats,
        )

    file_hashes = {k: v for k, v in index.file_hashes.items() if k not in changed}
    file_imports = {k: v for k, v in index.file_imports.items() if k not in changed}
    file_stats = {k: v for k, v in index.file_stats.items() if k not in changed}
    file_methods: dict[str, list[MethodRecord]] = {rel: [] for rel in file_hashes}
    for ref, rec in index.methods.items():
        if ref.file_path not in changed:
            file_methods[ref.file_path].append(rec)

    for rel in sorted(changed):
        path = root / rel
        if not path.is_file():
            continue  # deleted
        try:
            stat = _stat_of(path)
            digest, imports, records = _scan_file(root, rel)
        except Exception as exc:
            logger.warning("parse failure in %s (skipped): %s", rel, exc)
            continue
        file_hashes[rel] = digest
        file_imports[rel] = imports
        file_methods[rel] = records
        file_stats[rel] = stat

    return _assemble(
        file_hashes,
        file_imports,
        file_methods,
        file_stats,
        index.api_pool,
        index.built_at,
        clock.now(),
        index.build_duration,
    )


def callees_of(index: CodeIndex, method: MethodRef, depth: int) -> list[MethodRecord]:
    """In-project methods reachable from `method` within `depth` call edges."""
    if depth < 1:
        raise ValueError("depth must be positive")
    if method not in index.methods:
        raise UnknownMethod(method.display())
    seen: set[MethodRef] = set()
    frontier = deque([(method, 0)])
    while frontier:
        current, dist = frontier.popleft()
        if dist >= depth:
            continue
        for target in index.call_edges.get(current, ()):
            if target not in seen and target != method:
                seen.add(target)
                frontier.append((target, dist + 1))
    records = [index.methods[ref] for ref in seen]
    records.sort(key=lambda r: (r.ref.qualified_name, r.ref.signature, r.ref.file_path))
    return records


def public_api_of_imports(
    project_root: str | Path, dependency_dirs: list[Path]
) -> list[ApiEntry]:
    """Public members of dependency libraries that the project imports."""
    root = Path(project_root)
    imported: set[str] = set()
    for path in _iter_java_files(root):
        masked = javasrc.mask_comments_and_literals(
            path.read_text("utf-8", errors="replace")
        )
        imported.update(m.group(1) for m in javasrc._IMPORT_RE.finditer(masked))
    pool = _scan_dependency_dirs([Path(d) for d in dependency_dirs])
    return list(_filter_api(pool, imported))


def indexes_equivalent(a: CodeIndex, b: CodeIndex) -> bool:
    """Deep equality ignoring timestamps and durations."""
    return (
        a.index_version == b.index_version
        and a.project_fingerprint == b.project_fingerprint
        and a.methods == b.methods
        and a.api == b.api
        and a.call_edges == b.call_edges
        and a.file_hashes == b.file_hashes
        and a.file_imports == b.file_imports
        and a.api_pool == b.api_pool
    )


def index_path(project_root: str | Path) -> Path:
    return Path(project_root) / INDEX_RELPATH


def save_index(index: CodeIndex, project_root: str | Path) -> Path:
    path = index_path(project_root)
    save_index_file(index, path)
    return path


def load_index(project_root: str | Path) -> CodeIndex:
    return load_index_file(index_path(project_root))
