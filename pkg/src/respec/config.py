"""Pipeline configuration: gateway, verifier, test commands, budgets, prompts.

Loaded from a JSON file; every section has working defaults so unit tests
can construct configs directly. Prompt templates live here rather than in
code because the production prompts are inherently tunable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

DEFAULT_PROMPTS = {
    "spec_draft": (
        "Write a JML specification (requires/ensures/assigns/signals clauses) for the "
        "method below. Use only the information in the tests and sources provided. "
        "Answer with a single /*@ ... @*/ block."
    ),
    "spec_refine": (
        "The JML specification below failed verification. Repair the specification "
        "so it is syntactically and semantically valid, preserving its intent. "
        "Answer with a single /*@ ... @*/ block."
    ),
    "patch": (
        "Fix the bug in the method below. Answer with the complete replacement "
        "method in a fenced ```java code block. Do not change the method signature."
    ),
    "test_gen": (
        "Write unit tests for the method below, covering edge cases and exception "
        "behaviour. Answer with one fenced ```java code block per test method."
    ),
}


@dataclass(frozen=True)
class GatewayConfig:
    provider_url: str = ""
    model_id: str = "llama-3.1-405b"
    temperature: float = 0.0
    max_tokens: int = 4096
    api_key_env: str = "RESPEC_API_KEY"
    transcript_dir: str = "transcripts"


@dataclass(frozen=True)
class VerifierConfig:
    command: str = ""
    classpath: str = ""
    timeout: float = 60.0


@dataclass(frozen=True)
class TestingConfig:
    # command templates receive {test} and {project}; exit code 2 means the
    # project failed to build
    test_command: str = ""
    build_command: str = ""
    parallel_safe: bool = False
    timeout: float = 60.0
    infinite_loop_timeout_factor: float = 2.0


@dataclass(frozen=True)
class BudgetConfig:
    max_iterations: int = 5
    wall_clock_limit: float = 300.0
    plain_attempts: int = 3
    mixed_attempts: int = 3
    dedup: bool = True
    review_retry_rounds: int = 1

    def __post_init__(self) -> None:
        if self.max_iterations <= 0 or self.wall_clock_limit <= 0:
            raise ValueError("refinement budget values must be positive")
        if self.plain_attempts <= 0 or self.mixed_attempts <= 0:
            raise ValueError("attempt budgets must be positive")


@dataclass(frozen=True)
class RespecConfig:
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    testing: TestingConfig = field(default_factory=TestingConfig)
    budgets: BudgetConfig = field(default_factory=BudgetConfig)
    prompts: dict = field(default_factory=lambda: dict(DEFAULT_PROMPTS))
    paths: dict = field(default_factory=dict)
    base_dir: str = "."

    def prompt(self, name: str) -> str:
        return self.prompts.get(name, DEFAULT_PROMPTS[name])

    def resolve(self, path: str) -> Path:
        candidate = Path(path)
        if candidate.is_absolute():
            return candidate
        return (Path(self.base_dir) / candidate).resolve()

    def resolved_paths(self) -> dict[str, str]:
        """The `paths` section with every entry resolved against base_dir."""
        return {name: str(self.resolve(value)) for name, value in self.paths.items()}


def load_config(path: str | Path) -> RespecConfig:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    prompts = dict(DEFAULT_PROMPTS)
    prompts.update(raw.get("prompts", {}))
    return RespecConfig(
        gateway=GatewayConfig(**raw.get("gateway", {})),
        verifier=VerifierConfig(**raw.get("verifier", {})),
        testing=TestingConfig(**raw.get("testing", {})),
        budgets=BudgetConfig(**raw.get("budgets", {})),
        prompts=prompts,
        paths=dict(raw.get("paths", {})),
        base_dir=str(path.parent.resolve()),
    )


def default_config(**overrides) -> RespecConfig:
    return replace(RespecConfig(), **overrides)
