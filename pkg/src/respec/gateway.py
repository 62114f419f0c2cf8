"""Uniform model access with deterministic record/replay.

Prompts are ordered labeled sections (so plain and mixed patch prompts can
differ by exactly one section), keyed by a stable digest. The transcript
store is a directory of JSON envelopes named by key: diffable in review and
trivially versioned.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol

import httpx

from respec.clock import SYSTEM_CLOCK, Clock


class GatewayPolicy(Enum):
    REPLAY_ONLY = "ReplayOnly"
    RECORD_IF_MISSING = "RecordIfMissing"
    LIVE_ONLY = "LiveOnly"


class MissingTranscript(Exception):
    def __init__(self, key: str):
        super().__init__(f"no transcript recorded for key {key}")
        self.key = key


class ProviderError(Exception):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"provider returned status {status}: {detail}")
        self.status = status


class TranscriptMode(Enum):
    RECORDED = "Recorded"
    REPLAYED = "Replayed"


def _normalize(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


@dataclass(frozen=True)
class Prompt:
    sections: tuple[tuple[str, str], ...]
    model_id: str
    temperature: float = 0.0
    max_tokens: int = 4096

    def __post_init__(self) -> None:
        labels = [label for label, _ in self.sections]
        if len(set(labels)) != len(labels):
            raise ValueError("prompt section labels must be unique")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    def key(self) -> str:
        """Stable digest over model, temperature, and ordered sections."""
        canonical = json.dumps(
            {
                "model_id": self.model_id,
                "temperature": self.temperature,
                "sections": [[label, _normalize(text)] for label, text in self.sections],
            },
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=True,
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def section(self, label: str) -> str | None:
        for name, text in self.sections:
            if name == label:
                return text
        return None

    def rendered(self) -> str:
        parts = [f"## {label}\n{_normalize(text)}" for label, text in self.sections]
        return "\n\n".join(parts)


@dataclass(frozen=True)
class Transcript:
    key: str
    response: str
    recorded_at: str
    mode: TranscriptMode
    model_id: str = ""
    temperature: float = 0.0
    sections: tuple[tuple[str, str], ...] = ()


class ChatProvider(Protocol):
    def generate(self, prompt: Prompt) -> str:
        """Return the completion text for a prompt."""


class HttpChatProvider:
    """Generic chat-completion adapter over a single HTTP endpoint."""

    def __init__(self, url: str, api_key_env: str = "", timeout: float = 120.0):
        self.url = url
        self.api_key_env = api_key_env
        self.timeout = timeout

    def generate(self, prompt: Prompt) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": prompt.model_id,
            "temperature": prompt.temperature,
            "max_tokens": prompt.max_tokens,
            "messages": [{"role": "user", "content": prompt.rendered()}],
        }
        try:
            response = httpx.post(self.url, json=payload, headers=headers, timeout=self.timeout)
        except httpx.HTTPError as exc:
            raise ProviderError(0, str(exc)) from exc
        if response.status_code != 200:
            raise ProviderError(response.status_code, response.text[:500])
        body = response.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(200, "malformed completion payload") from exc


class TranscriptStore:
    """Directory of transcript envelopes named ``<key>.json``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> Transcript | None:
        path = self._path(key)
        if not path.is_file():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return Transcript(
            key=data["key"],
            response=data["response"],
            recorded_at=data["recorded_at"],
            mode=TranscriptMode.REPLAYED,
            model_id=data.get("model_id", ""),
            temperature=data.get("temperature", 0.0),
            sections=tuple((s["label"], s["text"]) for s in data.get("sections", [])),
        )

    def put(self, prompt: Prompt, response: str, clock: Clock = SYSTEM_CLOCK) -> Transcript:
        key = prompt.key()
        envelope = {
            "key": key,
            "model_id": prompt.model_id,
            "temperature": prompt.temperature,
            "sections": [{"label": label, "text": text} for label, text in prompt.sections],
            "response": response,
            "recorded_at": clock.now(),
        }
        self.root.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(envelope, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        tmp.replace(path)  # atomic publish
        return Transcript(
            key=key,
            response=response,
            recorded_at=envelope["recorded_at"],
            mode=TranscriptMode.RECORDED,
            model_id=prompt.model_id,
            temperature=prompt.temperature,
            sections=prompt.sections,
        )

    def keys(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.stem for p in self.root.glob("*.json"))

    def verify(self) -> list[str]:
        """Recompute every envelope's key; returns integrity problems."""
        problems = []
        for path in sorted(self.root.glob("*.json")):
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
                prompt = Prompt(
                    sections=tuple((s["label"], s["text"]) for s in data["sections"]),
                    model_id=data["model_id"],
                    temperature=data["temperature"],
                )
                expected = prompt.key()
            except (KeyError, ValueError, TypeError) as exc:
                problems.append(f"{path.name}: unreadable envelope ({exc})")
                continue
            if data.get("key") != expected:
                problems.append(f"{path.name}: stored key {data.get('key')} != computed {expected}")
            if path.stem != expected:
                problems.append(f"{path.name}: filename does not match computed key {expected}")
        return problems


def complete(
    prompt: Prompt,
    store: TranscriptStore,
    policy: GatewayPolicy,
    provider: ChatProvider | None = None,
    clock: Clock = SYSTEM_CLOCK,
) -> str:
    """Resolve a prompt to response text under the given replay policy."""
    if policy is not GatewayPolicy.LIVE_ONLY:
        recorded = store.get(prompt.key())
        if recorded is not None:
            return recorded.response
        if policy is GatewayPolicy.REPLAY_ONLY:
            raise MissingTranscript(prompt.key())
    if provider is None:
        raise ProviderError(0, "no provider configured for live completion")
    response = provider.generate(prompt)
    if policy is not GatewayPolicy.LIVE_ONLY:
        store.put(prompt, response, clock)
    return response


@dataclass
class GatewayClient:
    """Bound gateway: store, policy, and model settings in one handle."""

    store: TranscriptStore
    policy: GatewayPolicy
    model_id: str
    temperature: float = 0.0
    max_tokens: int = 4096
    provider: ChatProvider | None = None
    clock: Clock = field(default_factory=lambda: SYSTEM_CLOCK)

    def complete_sections(self, sections: list[tuple[str, str]]) -> str:
        prompt = self.build_prompt(sections)
        return complete(prompt, self.store, self.policy, self.provider, self.clock)

    def build_prompt(self, sections: list[tuple[str, str]]) -> Prompt:
        return Prompt(
            sections=tuple(sections),
            model_id=self.model_id,
            temperature=self.temperature,
            max_tokens=self.max_tokens,
        )
