"""Per-session persistence: append-only event logs plus content-addressed artifacts."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path


def canonical_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class SessionStore:
    """Directory layout: <root>/sessions/<case_id>/{events.jsonl,artifacts/}."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def sessions_root(self) -> Path:
        return self.root / "sessions"

    def session_dir(self, case_id: str) -> Path:
        return self.sessions_root() / case_id

    def list_sessions(self) -> list[str]:
        root = self.sessions_root()
        if not root.is_dir():
            return []
        return sorted(p.name for p in root.iterdir() if (p / "events.jsonl").is_file())

    # -- events --------------------------------------------------------

    def events_path(self, case_id: str) -> Path:
        return self.session_dir(case_id) / "events.jsonl"

    def read_events(self, case_id: str) -> list[dict]:
        path = self.events_path(case_id)
        if not path.is_file():
            return []
        events = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                events.append(json.loads(line))
        return events

    def append_event(self, case_id: str, event: dict) -> None:
        path = self.events_path(case_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        line = json.dumps(event, sort_keys=True, ensure_ascii=False)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(line + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    # -- artifacts -------------------------------------------------------

    def put_artifact(self, case_id: str, name: str, payload) -> str:
        """Store a JSON artifact content-addressed; returns its id."""
        envelope = canonical_json({"name": name, "payload": payload})
        artifact_id = hashlib.sha256(envelope.encode("utf-8")).hexdigest()[:16]
        directory = self.session_dir(case_id) / "artifacts"
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{artifact_id}.json"
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_text(envelope, encoding="utf-8")
            tmp.replace(path)
        return artifact_id

    def get_artifact(self, case_id: str, artifact_id: str):
        path = self.session_dir(case_id) / "artifacts" / f"{artifact_id}.json"
        data = json.loads(path.read_text(encoding="utf-8"))
        return data["payload"]

    def has_session(self, case_id: str) -> bool:
        return self.events_path(case_id).is_file()

    # -- case records ------------------------------------------------------

    def put_case(self, case_id: str, case_doc: dict) -> None:
        directory = self.session_dir(case_id)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "case.json").write_text(canonical_json(case_doc), encoding="utf-8")

    def get_case(self, case_id: str) -> dict:
        return json.loads(
            (self.session_dir(case_id) / "case.json").read_text(encoding="utf-8")
        )
