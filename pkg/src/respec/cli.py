"""respec command line: index, lint, store checks, repair runs, reports, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from respec.config import RespecConfig, load_config
from respec.core.model import BugCategory
from respec.gateway import GatewayPolicy, HttpChatProvider, TranscriptStore
from respec.index import build_index, load_index, save_index, update_index
from respec.jml import parse_jml
from respec.runner import build_context, run_cases_file
from respec.synthesis import RefinementBudget, refine_loop, resolve_target
from respec.taxonomy import aggregate, percentage_summary, render_csv, render_text


@click.group()
def main():
    """Specification-guided program repair pipeline."""


def _load_config(config_path: str | None, anchor: Path | None = None) -> RespecConfig:
    if config_path:
        return load_config(config_path)
    if anchor is not None:
        candidate = anchor / "respec.json"
        if candidate.is_file():
            return load_config(candidate)
    return RespecConfig()


@main.command()
@click.argument("root", type=click.Path(exists=True, file_okay=False))
@click.option("--deps", "dep_dirs", multiple=True, type=click.Path(), help="library source dirs")
@click.option("--update", "update_mode", is_flag=True, help="incrementally update the stored index")
@click.option("--changed", "changed_files", multiple=True, help="project-relative changed paths")
def index(root, dep_dirs, update_mode, changed_files):
    """Build or update the code index; prints a project,methods,seconds CSV row."""
    root = Path(root)
    if update_mode:
        current = load_index(root)
        updated = update_index(current, list(changed_files), root)
        save_index(updated, root)
        click.echo(f"{root.name},{updated.method_count()},{updated.build_duration:.3f}")
        return
    built = build_index(root, [Path(d) for d in dep_dirs])
    save_index(built, root)
    click.echo(f"{root.name},{built.method_count()},{built.build_duration:.3f}")


@main.group()
def jml():
    """JML specification tools."""


@jml.command("lint")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
def jml_lint(file):
    """Parse a JML block and emit severity:line:col:message diagnostics."""
    text = Path(file).read_text(encoding="utf-8")
    result = parse_jml(text)
    for diagnostic in result.diagnostics:
        click.echo(diagnostic.render())
    if result.diagnostics:
        sys.exit(1)
    click.echo(f"ok: {len(result.clauses)} clauses")


@main.group()
def llm():
    """Gateway and transcript store tools."""


@llm.command("verify-store")
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True, file_okay=False))
def llm_verify_store(store_dir):
    """Check every transcript envelope's key integrity."""
    problems = TranscriptStore(store_dir).verify()
    for problem in problems:
        click.echo(problem)
    if problems:
        sys.exit(1)
    click.echo(f"ok: {len(TranscriptStore(store_dir).keys())} transcripts verified")


def _find_case(cases_file: Path, case_id: str):
    from respec.core.model import load_cases

    for case in load_cases(cases_file):
        if case.case_id == case_id:
            return case
    raise click.ClickException(f"case {case_id} not found in {cases_file}")


def _gateway_policy(replay_dir: str | None, live: bool) -> GatewayPolicy:
    if live:
        return GatewayPolicy.RECORD_IF_MISSING
    return GatewayPolicy.REPLAY_ONLY


@main.command("spec")
@click.argument("case_id")
@click.option("--cases", "cases_file", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--max-iter", type=int, default=None, help="refinement iteration cap")
@click.option("--replay-dir", type=click.Path(), help="transcript store to replay")
@click.option("--out", "out_dir", default=".respec/run", type=click.Path())
def spec_command(case_id, cases_file, config_path, max_iter, replay_dir, out_dir):
    """Draft and refine a JML spec for one case (replay transcripts)."""
    cases_file = Path(cases_file)
    config = _load_config(config_path, cases_file.parent)
    context = build_context(config, out_dir, replay_dir)
    case = _find_case(cases_file, case_id)
    runner = context.make_runner(case)

    from respec.synthesis import draft_specs

    index = runner.index()
    target_draft, callee_drafts = draft_specs(
        case, index, context.client, config.prompt("spec_draft")
    )
    budget = RefinementBudget(
        max_iterations=max_iter or config.budgets.max_iterations,
        wall_clock_limit=config.budgets.wall_clock_limit,
    )
    verifier = runner._verifier()
    result = refine_loop(
        target_draft,
        verifier,
        context.client,
        budget,
        context.store.session_dir(case.case_id) / "scratch",
        config.prompt("spec_refine"),
        clock=runner.clock,
    )
    click.echo(f"callee specs drafted: {len(callee_drafts)}")
    click.echo(f"terminal: {result.terminal.value} after {result.iterations} iteration(s)")
    click.echo(result.text)


@main.command("repair")
@click.argument("case_id")
@click.option("--cases", "cases_file", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--plain", "plain_attempts", type=int, default=None)
@click.option("--mixed", "mixed_attempts", type=int, default=None)
@click.option("--replay-dir", type=click.Path())
@click.option("--out", "out_dir", default=".respec/run", type=click.Path())
def repair(case_id, cases_file, config_path, plain_attempts, mixed_attempts, replay_dir, out_dir):
    """Run the full pipeline for one case up to human review."""
    cases_file = Path(cases_file)
    config = _load_config(config_path, cases_file.parent)
    if plain_attempts or mixed_attempts:
        from dataclasses import replace

        budgets = replace(
            config.budgets,
            plain_attempts=plain_attempts or config.budgets.plain_attempts,
            mixed_attempts=mixed_attempts or config.budgets.mixed_attempts,
        )
        config = replace(config, budgets=budgets)
    context = build_context(config, out_dir, replay_dir)
    case = _find_case(cases_file, case_id)
    runner = context.make_runner(case)
    state = runner.run_to_review()
    view = runner.view
    click.echo(f"{case_id}: {state.value}")
    if "review-summary" in view.artifacts:
        summary = context.store.get_artifact(case_id, view.artifacts["review-summary"])
        click.echo(json.dumps(summary, indent=2, sort_keys=True))


@main.command("validate")
@click.argument("case_id")
@click.argument("patch_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--cases", "cases_file", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", default=".respec/run", type=click.Path())
def validate(case_id, patch_file, cases_file, config_path, out_dir):
    """Judge a patch file against a case's provided and held-out tests."""
    from respec.core.model import CandidatePatch, OriginMode
    from respec.validation import judge

    cases_file = Path(cases_file)
    config = _load_config(config_path, cases_file.parent)
    context = build_context(config, out_dir)
    case = _find_case(cases_file, case_id)
    runner = context.make_runner(case)
    index = runner.index()
    target = resolve_target(case, index)
    diff = Path(patch_file).read_text(encoding="utf-8")
    candidate = CandidatePatch(
        patch_id="cli-validate",
        diff=diff,
        origin_mode=OriginMode.PLAIN,
        attempt_index=0,
        target=target.ref,
    )
    verdict = judge(
        candidate,
        case,
        runner.pristine(),
        runner._test_command(),
        context.store.session_dir(case_id) / "work" / "cli-validate",
        provided_suite=runner._provided_suite(),
        heldout_sources=runner._heldout_sources(),
    )
    click.echo(
        json.dumps(
            {
                "plausible": verdict.plausible,
                "overfit_suspected": verdict.overfit_suspected,
                "provided": verdict.provided.status.value,
                "heldout": verdict.heldout.status.value,
            },
            indent=2,
            sort_keys=True,
        )
    )


@main.command("report")
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
def report(run_dir, fmt):
    """Aggregate a run directory into a per-category fixes table."""
    from respec.orchestrator.session import replay_events
    from respec.orchestrator.store import SessionStore

    store = SessionStore(run_dir)
    records = []
    for case_id in store.list_sessions():
        view = replay_events(case_id, store.read_events(case_id))
        category = BugCategory.LOGIC_ERROR
        plausible_mode = None
        for event in view.events:
            if event["type"] != "transition":
                continue
            if event["data"].get("category"):
                category = BugCategory(event["data"]["category"])
            if event["data"].get("winner") and event["data"].get("mode"):
                plausible_mode = event["data"]["mode"]
        records.append(
            (category, plausible_mode == "Plain", plausible_mode in ("Plain", "Mixed"))
        )
    table = aggregate(records)
    click.echo(render_text(table) if fmt == "text" else render_csv(table), nl=False)
    if records:
        plain_rate, ours_rate = percentage_summary(table)
        click.echo(f"\nplausible: plain {plain_rate}% vs mixed-enabled {ours_rate}%")


@main.command("run")
@click.argument("cases_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--replay-dir", type=click.Path(), help="transcript store to replay")
@click.option("--out", "out_dir", default=".respec/run", type=click.Path())
@click.option("--parallel", type=int, default=1)
@click.option("--live", is_flag=True, help="allow live provider calls (records transcripts)")
def run(cases_file, config_path, replay_dir, out_dir, parallel, live):
    """Drive every case in the file to review (or closure)."""
    cases_file = Path(cases_file)
    config = _load_config(config_path, cases_file.parent)
    provider = None
    if live and config.gateway.provider_url:
        provider = HttpChatProvider(config.gateway.provider_url, config.gateway.api_key_env)
    results = run_cases_file(
        cases_file,
        config_path or (cases_file.parent / "respec.json" if (cases_file.parent / "respec.json").is_file() else None),
        out_dir,
        replay_dir,
        _gateway_policy(replay_dir, live),
        provider,
        parallel,
    )
    exit_code = 0
    for result in results:
        mode = f" via {result.winning_mode}" if result.winning_mode else ""
        overfit = " [overfit suspected]" if result.overfit_suspected else ""
        plausible = "plausible" if result.plausible_patch_id else "no plausible patch"
        parked = " (parked)" if result.parked else ""
        click.echo(f"{result.case_id}: {result.state} - {plausible}{mode}{overfit}{parked}")
        if result.parked:
            exit_code = 1
    sys.exit(exit_code)


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8642", help="HOST:PORT to bind")
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True))
def serve(addr, store_dir, config_path):
    """Serve the review API over HTTP for the browser console."""
    import uvicorn

    from respec.orchestrator.service import create_app

    config = _load_config(config_path, Path(store_dir))
    app = create_app(store_dir, config)
    host, _, port = addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8642), log_level="info")


if __name__ == "__main__":
    main()
