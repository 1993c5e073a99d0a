"""``@timing`` strings and their mapping to logical ticks."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from ..errors import DSLSyntaxError, IndivisiblePeriod

UNIT_SECONDS = {"sec": 1, "min": 60, "hour": 3600}

_EVERY = re.compile(r"\s*every\s+(\d+)\s+(sec|min|hour)\b")
_BASE = re.compile(r"\s+base\s+((?:\d{4}:\d{2}:\d{2}:)?\d{2}:\d{2}:\d{2})\s*$")


@dataclass(frozen=True)
class Anytime:
    def __str__(self):
        return "anytime"


@dataclass(frozen=True)
class Every:
    n: int
    unit: str
    base: Optional[str] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("period must be at least 1")
        if self.unit not in UNIT_SECONDS:
            raise ValueError(f"unknown unit {self.unit!r}")

    @property
    def seconds(self):
        return self.n * UNIT_SECONDS[self.unit]

    def __str__(self):
        text = f"every {self.n} {self.unit}"
        return text + (f" base {self.base}" if self.base else "")


ANYTIME = Anytime()


def _check_base(base, offset):
    parts = [int(x) for x in base.split(":")]
    hh, mm, ss = parts[-3:]
    if hh > 23 or mm > 59 or ss > 59:
        raise DSLSyntaxError(f"bad clock time {base!r}", offset)
    if len(parts) == 6:
        _, mo, dd = parts[:3]
        if not 1 <= mo <= 12 or not 1 <= dd <= 31:
            raise DSLSyntaxError(f"bad date {base!r}", offset)


def parse_timing(s):
    """Parse ``every N (sec|min|hour) [base [yyyy:mm:dd:]hh:mm:ss]`` or ``anytime``.

    The base offset is kept for printing but plays no role in logical time.
    """
    if s.strip() == "anytime":
        return ANYTIME
    m = _EVERY.match(s)
    if not m:
        bad = len(s) - len(s.lstrip())
        raise DSLSyntaxError(f"expected 'every N sec|min|hour' or 'anytime' in {s!r}",
                             len(s[:bad].encode()))
    n = int(m.group(1))
    if n < 1:
        raise DSLSyntaxError("timing period must be at least 1", len(s[:m.start(1)].encode()))
    rest = s[m.end():]
    if not rest.strip():
        return Every(n, m.group(2))
    b = _BASE.match(rest)
    if not b:
        raise DSLSyntaxError(f"expected 'base hh:mm:ss' after period in {s!r}",
                             len(s[:m.end()].encode()))
    _check_base(b.group(1), len(s[:m.end() + b.start(1)].encode()))
    return Every(n, m.group(2), b.group(1))


def timing_seconds(spec):
    """Period in seconds, or None for ``anytime``."""
    return None if isinstance(spec, Anytime) else spec.seconds


def seconds_to_ticks(seconds, tick_seconds):
    if tick_seconds < 1:
        raise ValueError("tick length must be a positive number of seconds")
    if seconds is None:
        return 1
    if seconds % tick_seconds:
        raise IndivisiblePeriod(f"{seconds} s is not a multiple of the {tick_seconds} s tick")
    return seconds // tick_seconds


def timing_to_ticks(spec, tick_seconds):
    return seconds_to_ticks(timing_seconds(spec), tick_seconds)


def combine_seconds(union, periods):
    """Inferred period of a join; None stands for ``anytime``.

    ``anytime`` absorbs a union (the join can fire at any tick) and is neutral
    for an intersection (the periodic inputs decide).
    """
    periods = list(periods)
    if union:
        if not periods or any(p is None for p in periods):
            return None
        return math.gcd(*periods)
    fixed = [p for p in periods if p is not None]
    if not fixed:
        return None
    return math.lcm(*fixed)


def seconds_to_spec(seconds):
    if seconds is None:
        return ANYTIME
    for unit in ("hour", "min"):
        if seconds % UNIT_SECONDS[unit] == 0:
            return Every(seconds // UNIT_SECONDS[unit], unit)
    return Every(seconds, "sec")


def describe(seconds):
    return str(seconds_to_spec(seconds))
