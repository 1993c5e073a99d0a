"""ID resolver, process environment, and switch history.

``IdentEnv`` and ``ProcEnv`` are plain dicts (id -> entry / process) treated
as immutable values; ``env_update`` returns a new dict.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

from .errors import NoSnapshot
from .store import BOTTOM, Relation
from .terms import Mode, process_kind


@dataclass(frozen=True)
class ResolverEntry:
    relation: Relation
    tm: int
    mode: Mode

    def __post_init__(self):
        if self.tm < 1:
            raise ValueError(f"tm must be >= 1, got {self.tm}")

    def with_relation(self, relation):
        return ResolverEntry(relation, self.tm, self.mode)


def env_update(m, key, val):
    out = dict(m)
    out[key] = val
    return out


def copy_ident_env(mu):
    """Deep enough copy for in-place mutation of relations."""
    return {l: e.with_relation(e.relation.copy()) for l, e in mu.items()}


class SwitchHistory:
    """Snapshots of the process environment indexed by tick."""

    __slots__ = ("_times", "_snaps")

    def __init__(self, snapshots=None):
        self._snaps = dict(snapshots or {})
        if any(t is BOTTOM for t in self._snaps):
            raise ValueError("switch history snapshots need a real tick")
        self._times = sorted(self._snaps)

    def record(self, t, nu):
        if t is BOTTOM:
            raise ValueError("cannot record a snapshot at bottom")
        snaps = dict(self._snaps)
        snaps[t] = nu
        return SwitchHistory(snaps)

    def at(self, t):
        i = bisect.bisect_right(self._times, -1 if t is BOTTOM else t)
        if i == 0:
            raise NoSnapshot(f"no snapshot at or before {t}")
        return self._snaps[self._times[i - 1]]

    def times(self):
        return list(self._times)

    def items(self):
        return [(t, self._snaps[t]) for t in self._times]

    def __eq__(self, other):
        return isinstance(other, SwitchHistory) and self._snaps == other._snaps

    def __repr__(self):
        return f"SwitchHistory(times={self._times})"


def history_record(phi, t, nu):
    return phi.record(t, nu)


def history_at(phi, t):
    return phi.at(t)


def dependency_graph(nu):
    return {l: tuple(p.inputs) for l, p in nu.items()}


def check_acyclic(nu):
    try:
        tuple(TopologicalSorter(dependency_graph(nu)).static_order())
    except CycleError:
        return False
    return True


def downstream_closure(nu, roots):
    """All ids reachable from ``roots`` along input -> consumer edges."""
    consumers = {}
    for l, p in nu.items():
        for i in p.inputs:
            consumers.setdefault(i, set()).add(l)
    seen = set()
    work = list(roots)
    while work:
        l = work.pop()
        for c in consumers.get(l, ()):
            if c not in seen:
                seen.add(c)
                work.append(c)
    return seen


def upstream_closure(nu, roots):
    seen = set(roots)
    work = list(roots)
    while work:
        l = work.pop()
        p = nu.get(l)
        if p is None:
            continue
        for i in p.inputs:
            if i not in seen:
                seen.add(i)
                work.append(i)
    return seen


def dump_history(phi):
    lines = []
    for t, nu in phi.items():
        cells = [str(t)]
        for l in sorted(nu):
            p = nu[l]
            cells.append(f"{l}:{process_kind(p)}:{','.join(p.inputs)}")
        lines.append("\t".join(cells))
    return "".join(line + "\n" for line in lines)
