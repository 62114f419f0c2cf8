"""Clock injection: wall time for live runs, fixed steps for replay runs.

Replayed pipeline runs must produce byte-identical artifacts, so anything
persisted takes its timestamps from an injected clock rather than reading
wall time directly.
"""

from __future__ import annotations

import time
from datetime import datetime, timezone
from typing import Protocol


class Clock(Protocol):
    def now(self) -> str:
        """Current time as an ISO-8601 UTC string."""

    def monotonic(self) -> float:
        """Seconds on a monotonically increasing scale."""


class SystemClock:
    def now(self) -> str:
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")

    def monotonic(self) -> float:
        return time.monotonic()


class FixedStepClock:
    """Advances one second per reading; deterministic across runs."""

    def __init__(self, start: str = "2000-01-01T00:00:00Z"):
        self._start = datetime.strptime(start, "%Y-%m-%dT%H:%M:%SZ").replace(
            tzinfo=timezone.utc
        )
        self._ticks = 0

    def now(self) -> str:
        tick = self._ticks
        self._ticks += 1
        stamp = datetime.fromtimestamp(self._start.timestamp() + tick, tz=timezone.utc)
        return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")

    def monotonic(self) -> float:
        tick = self._ticks
        self._ticks += 1
        return float(tick)


SYSTEM_CLOCK = SystemClock()
