"""Scriptable stand-in for an external JML verifier.

Reads a schedule file mapping target methods to a sequence of outcomes and
replays them across invocations, keeping a per-target counter in a state
directory. Output mimics the line vocabulary the classifier understands,
so pipeline runs are deterministic without a JVM.

Schedule format::

    {
      "targets": {
        "com.ex.Widget.frob": ["specdefect:identifier 'x' not in scope",
                                "verified"]
      },
      "default": ["verified"]
    }

Outcome tokens: ``verified``, ``specdefect[:message]``,
``bugsignal[:message]``, ``toolfailure``. The last entry repeats once the
schedule is exhausted.

Usage: ``python -m respec.mock_verifier --schedule S --state-dir D FILE``
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

_TARGET_RE = re.compile(r"^//\s*target:\s*(\S+)", re.MULTILINE)


def _load_counter(state_dir: Path, target: str) -> int:
    state_file = state_dir / "counters.json"
    if state_file.is_file():
        counters = json.loads(state_file.read_text(encoding="utf-8"))
    else:
        counters = {}
    return counters.get(target, 0)


def _bump_counter(state_dir: Path, target: str) -> None:
    state_dir.mkdir(parents=True, exist_ok=True)
    state_file = state_dir / "counters.json"
    counters = {}
    if state_file.is_file():
        counters = json.loads(state_file.read_text(encoding="utf-8"))
    counters[target] = counters.get(target, 0) + 1
    state_file.write_text(json.dumps(counters, indent=2, sort_keys=True), encoding="utf-8")


def _emit(outcome: str, target: str, file_name: str) -> int:
    kind, _, message = outcome.partition(":")
    kind = kind.strip().lower()
    if kind == "verified":
        print(f"Verification successful: {target} verified.")
        return 0
    if kind == "specdefect":
        detail = message or "unexpected token in specification"
        print(f"{file_name}:2: error: JML syntax error: {detail}", file=sys.stderr)
        return 1
    if kind == "bugsignal":
        detail = message or "\\result != null"
        print(
            f"{file_name}:4: verify: postcondition not established (ensures {detail})",
            file=sys.stderr,
        )
        return 1
    print("Internal error: simulated tool crash", file=sys.stderr)
    return 2


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="scriptable mock JML verifier")
    parser.add_argument("--schedule", required=True, help="schedule JSON file")
    parser.add_argument("--state-dir", required=True, help="directory for invocation counters")
    parser.add_argument("file", help="Java source with inlined JML")
    args = parser.parse_args(argv)

    source = Path(args.file).read_text(encoding="utf-8")
    target_match = _TARGET_RE.search(source)
    target = target_match.group(1) if target_match else "<unknown>"

    schedule = json.loads(Path(args.schedule).read_text(encoding="utf-8"))
    outcomes = schedule.get("targets", {}).get(target) or schedule.get("default") or ["verified"]

    state_dir = Path(args.state_dir)
    call_index = _load_counter(state_dir, target)
    _bump_counter(state_dir, target)
    outcome = outcomes[min(call_index, len(outcomes) - 1)]
    return _emit(outcome, target, Path(args.file).name)


if __name__ == "__main__":
    sys.exit(main())
