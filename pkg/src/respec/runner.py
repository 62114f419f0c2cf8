"""Batch driver: run a cases file through the pipeline into a session store."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from respec.clock import SYSTEM_CLOCK, FixedStepClock
from respec.config import RespecConfig, load_config
from respec.core.model import BugCase, load_cases
from respec.gateway import ChatProvider, GatewayClient, GatewayPolicy, TranscriptStore
from respec.orchestrator.engine import PipelineContext, StageFailure
from respec.orchestrator.store import SessionStore


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    state: str
    plausible_patch_id: str | None
    winning_mode: str | None
    overfit_suspected: bool
    parked: bool = False


def build_context(
    config: RespecConfig,
    out_dir: str | Path,
    replay_dir: str | Path | None = None,
    policy: GatewayPolicy = GatewayPolicy.REPLAY_ONLY,
    provider: ChatProvider | None = None,
    record_clock=None,
) -> PipelineContext:
    transcript_dir = Path(replay_dir) if replay_dir else config.resolve(
        config.gateway.transcript_dir
    )
    client = GatewayClient(
        store=TranscriptStore(transcript_dir),
        policy=policy,
        model_id=config.gateway.model_id,
        temperature=config.gateway.temperature,
        max_tokens=config.gateway.max_tokens,
        provider=provider,
    )
    if record_clock is not None:
        client.clock = record_clock
    # replayed runs take deterministic per-session clocks so persisted
    # artifacts are byte-stable across runs
    if policy is GatewayPolicy.REPLAY_ONLY:
        clock_factory = FixedStepClock
    else:
        clock_factory = lambda: SYSTEM_CLOCK  # noqa: E731
    return PipelineContext(
        config=config,
        client=client,
        store=SessionStore(out_dir),
        clock_factory=clock_factory,
    )


def run_case(context: PipelineContext, case: BugCase) -> CaseResult:
    runner = context.make_runner(case)
    parked = False
    try:
        runner.run_to_review()
    except StageFailure:
        parked = True
    view = runner.view
    summary = {}
    if "review-summary" in view.artifacts:
        summary = context.store.get_artifact(case.case_id, view.artifacts["review-summary"])
    winning_mode = None
    if summary.get("plausible_patch_id"):
        for event in view.events:
            if event["type"] == "transition" and event["data"].get("winner") == summary[
                "plausible_patch_id"
            ]:
                winning_mode = event["data"].get("mode")
    return CaseResult(
        case_id=case.case_id,
        state=view.state.value,
        plausible_patch_id=summary.get("plausible_patch_id"),
        winning_mode=winning_mode,
        overfit_suspected=bool(summary.get("overfit_suspected")),
        parked=parked,
    )


def run_cases_file(
    cases_file: str | Path,
    config_file: str | Path | None = None,
    out_dir: str | Path = ".respec/run",
    replay_dir: str | Path | None = None,
    policy: GatewayPolicy = GatewayPolicy.REPLAY_ONLY,
    provider: ChatProvider | None = None,
    parallel: int = 1,
    record_clock=None,
) -> list[CaseResult]:
    cases_file = Path(cases_file)
    if config_file is None:
        candidate = cases_file.parent / "respec.json"
        config_file = candidate if candidate.is_file() else None
    config = load_config(config_file) if config_file else RespecConfig()
    context = build_context(config, out_dir, replay_dir, policy, provider, record_clock)
    cases = load_cases(cases_file)
    if parallel <= 1:
        return [run_case(context, case) for case in cases]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        futures = [pool.submit(run_case, context, case) for case in cases]
        return [f.result() for f in futures]
