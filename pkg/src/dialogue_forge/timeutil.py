"""Timestamp helpers.

Timestamps are ISO-8601 UTC strings ("2025-01-01T00:00:00Z") so lexicographic
order equals chronological order. Pipelines inject a tick clock to make
artifacts byte-identical across reruns.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Callable

STAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

DEFAULT_TICK_BASE = "2025-01-01T00:00:00Z"

Clock = Callable[[], str]


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime(STAMP_FORMAT)


def parse_stamp(stamp: str) -> datetime:
    return datetime.strptime(stamp, STAMP_FORMAT).replace(tzinfo=timezone.utc)


def make_tick_clock(base: str = DEFAULT_TICK_BASE, step_seconds: int = 1) -> Clock:
    """Deterministic clock: returns base, base+step, base+2*step, ... per call."""
    start = parse_stamp(base)
    counter = iter(range(10**12))

    def tick() -> str:
        return (start + timedelta(seconds=step_seconds * next(counter))).strftime(STAMP_FORMAT)

    return tick
