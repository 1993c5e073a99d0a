"""Checkpoint/recovery wave and the re-execution oracle for lost propagations.

Recovery re-derives, for every instance, the rows that should exist in the
window ``(last_checkpoint, checkpoint_t]`` given its join mode and the rows of
its (already recovered) upstreams, and rewrites rows that are missing or
stale. Effects are recomputed under the topology recorded in the switch
history at each tick, with the same read discipline a loss-free propagation
would have used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Dict, List, Optional, Tuple

from .consistency import (equiv_mode, equiv_records_at, equiv_records_upto, equiv_tm,
                          history_equiv_upto)
from .engine import MachineState, evaluate, schedule_order, step
from .env import copy_ident_env, downstream_closure, upstream_closure
from .errors import HypothesisViolation, NoSnapshot, Stuck, TopologyGap, UnknownId, UpstreamGap
from .store import BOTTOM
from .terms import Guarded, Mode, Propagation, Source, read_ids


@dataclass
class CheckpointState:
    last_checkpoint: Dict[str, int]
    interval: Dict[str, Optional[int]] = field(default_factory=dict)

    @classmethod
    def initial(cls, ids, start=0, interval=None):
        return cls({l: start for l in ids}, dict(interval or {}))

    def copy(self):
        return CheckpointState(dict(self.last_checkpoint), dict(self.interval))


@dataclass
class RecoveryReport:
    checkpoint_t: int
    repaired: List[Tuple[str, int, tuple]] = field(default_factory=list)
    blocked: List[str] = field(default_factory=list)
    advanced: List[str] = field(default_factory=list)

    def render(self, mu=None):
        lines = []
        for l, t, vals in self.repaired:
            if mu is not None:
                cells = ",".join(f"{p}={v}" for p, v in zip(mu[l].relation.schema, vals))
            else:
                cells = ",".join(vals)
            lines.append((l, 0, t, f"REPAIRED\t{l}\t{t}\t{cells}"))
        for l in self.blocked:
            lines.append((l, 1, 0, f"BLOCKED\t{l}"))
        for l in self.advanced:
            lines.append((l, 2, 0, f"ADVANCED\t{l}\t{self.checkpoint_t}"))
        lines.sort(key=lambda x: x[:3])
        return "".join(x[3] + "\n" for x in lines)


class _Topologies:
    """Switch-history lookups and canonical schedules, memoized per tick."""

    def __init__(self, phi, mu, feeds):
        self.phi = phi
        self.mu = mu
        self.feeds = feeds
        self._order = {}

    def at(self, t):
        try:
            return self.phi.at(t)
        except NoSnapshot:
            raise TopologyGap(f"no recorded topology at or before t={t}") from None

    def computed_before(self, l, t):
        nu = self.at(t)
        key = (id(nu), t)
        order = self._order.get(key)
        if order is None:
            order = self._order[key] = {
                x: i for i, x in enumerate(schedule_order(nu, t, self.mu, self.feeds))}
        i = order.get(l)
        if i is None:
            return frozenset()
        return frozenset(x for x, j in order.items() if j < i)


def _source_ticks(mu, l, from_t, to_t, feeds):
    tm = mu[l].tm
    if feeds is not None and l in feeds.on_demand:
        return sorted({t for x, _, t in feeds.streams if x == l and from_t < t <= to_t})
    first = (from_t // tm + 1) * tm
    return range(first, to_t + 1, tm)


def _guarded_ticks(mu, proc, l, from_t, to_t):
    tm = mu[l].tm
    per_input = []
    for i in proc.inputs:
        if i not in mu:
            raise UpstreamGap(f"upstream {i} of {l} has no relation")
        R = mu[i].relation
        ti = mu[i].tm
        per_input.append({u for u in R.times() if from_t < u <= to_t and u % ti == 0})
    if not per_input:
        return set()
    if mu[l].mode is Mode.INTERSECTION:
        ticks = set.intersection(*per_input)
    else:
        ticks = set.union(*per_input)
    return {u for u in ticks if u % tm == 0}


def _candidate_ticks(mu, phi, l, from_t, to_t, feeds):
    """Ticks in the window where ``l`` is expected to hold a row, with the topology."""
    times = [u for u in phi.times() if from_t < u <= to_t]
    snaps = {id(phi.at(u)): phi.at(u) for u in times}
    try:
        first = phi.at(from_t + 1 if from_t is not BOTTOM else 0)
        snaps[id(first)] = first
    except NoSnapshot:
        pass
    out = set()
    for nu in snaps.values():
        proc = nu.get(l)
        if isinstance(proc, Source):
            out |= set(_source_ticks(mu, l, from_t, to_t, feeds))
        elif isinstance(proc, Guarded):
            out |= _guarded_ticks(mu, proc, l, from_t, to_t)
    return sorted(out)


def _recalc_inplace(mu, topo, l, from_t, to_t, feeds):
    repaired = []
    if l not in mu:
        raise UnknownId(l)
    R = mu[l].relation
    for u in _candidate_ticks(mu, topo.phi, l, from_t, to_t, feeds):
        nu = topo.at(u)
        proc = nu.get(l)
        if proc is None or not hasattr(proc, "effects"):
            continue
        if isinstance(proc, Source):
            if feeds is not None and not feeds.active(l, u):
                continue
        else:
            have = [i in mu and mu[i].relation.row_at(u) is not None for i in proc.inputs]
            ok = all(have) if mu[l].mode is Mode.INTERSECTION else any(have)
            if not ok:
                continue
        mode = Propagation(topo.computed_before(l, u))
        vals = []
        for p, eff in zip(proc.signals, proc.effects):
            v = None
            if feeds is not None and isinstance(proc, Source):
                v = feeds.value(l, p, u)
            if v is None:
                try:
                    v = evaluate(mu, nu, u, mode, eff, feeds=feeds)
                except Stuck as exc:
                    raise UpstreamGap(f"cannot recompute {l}.{p} at t={u}: {exc}") from None
            vals.append(v)
        vals = tuple(vals)
        if R.row_at(u) != vals:
            R.put(u, vals)
            repaired.append((l, u, vals))
    return repaired


def recalc_instance(mu, phi, l, from_t, to_t, feeds=None):
    """Recompute ``l``'s expected rows in ``(from_t, to_t]``; returns ``(mu', repaired)``."""
    if from_t is not BOTTOM and to_t < from_t:
        raise ValueError(f"empty window ({from_t}, {to_t}]")
    mu2 = copy_ident_env(mu)
    topo = _Topologies(phi, mu2, feeds)
    return mu2, _recalc_inplace(mu2, topo, l, from_t, to_t, feeds)


def _window_snapshots(phi, start, to_t):
    snaps = [phi.at(u) for u in phi.times() if start < u <= to_t]
    try:
        snaps.append(phi.at(start))
    except NoSnapshot:
        pass
    return snaps


def _window_graph(snaps):
    graph = {}
    for nu in snaps:
        for l, p in nu.items():
            graph.setdefault(l, set()).update(p.inputs)
    return graph


def _direct_reads(snaps, graph):
    """Extra ordering edges: effects that name another instance outright."""
    out = {}
    for nu in snaps:
        for l, p in nu.items():
            exprs = list(getattr(p, "effects", ())) + [m.body for m in getattr(p, "methods", ())]
            refs = set().union(*(read_ids(e) for e in exprs)) if exprs else set()
            out.setdefault(l, set()).update(r for r in refs if r in graph and r != l)
    return out


def _toposort(graph):
    return list(TopologicalSorter(
        {l: sorted(ins) for l, ins in sorted(graph.items())}).static_order())


def _wave_order(graph, reads=None):
    """Upstreams first, and direct reads first when that stays acyclic.

    Returns ``(order, settles)``; ``settles`` is False when some dependency
    cycle remains, in which case one pass in this order may not be enough.
    """
    if reads:
        merged = {l: set(graph.get(l, ())) | reads.get(l, set()) for l in graph}
        try:
            return _toposort(merged), True
        except CycleError:
            pass
    try:
        return _toposort(graph), not reads
    except CycleError:
        # switches inside the window can make the union graph cyclic
        return sorted(graph), False


class _Inputs:
    __slots__ = ("inputs",)

    def __init__(self, ins):
        self.inputs = tuple(sorted(ins))


def run_checkpoint(s, cp, checkpoint_t, fault=None, targets=None, inplace=False):
    """Run one recovery wave up to ``checkpoint_t``.

    Each participant recomputes from its own last checkpoint once all of its
    upstreams are done. Effects that read another instance by id order the
    wave too; if those reads close a loop, the wave repeats until stable.
    Faulted ids and everything downstream of them keep their last checkpoint
    and are reported as blocked.
    """
    if checkpoint_t > s.t:
        raise ValueError(f"checkpoint {checkpoint_t} is ahead of the machine clock {s.t}")
    fault = set(fault or ())
    mu = s.mu if inplace else copy_ident_env(s.mu)
    cp2 = cp.copy()
    start = min((cp2.last_checkpoint.get(l, 0) for l in mu), default=0)
    snaps = _window_snapshots(s.phi, start, checkpoint_t)
    graph = _window_graph(snaps)
    view = {l: _Inputs(ins) for l, ins in graph.items()}
    participants = set(graph)
    if targets is not None:
        participants = upstream_closure(view, targets)
    blocked = (fault | downstream_closure(view, fault)) & participants
    topo = _Topologies(s.phi, mu, s.feeds)
    report = RecoveryReport(checkpoint_t)
    order, settles = _wave_order(graph, _direct_reads(snaps, graph))
    active = []
    for l in order:
        if l not in participants or l not in mu:
            continue
        if l in blocked:
            report.blocked.append(l)
        elif cp2.last_checkpoint.get(l, 0) < checkpoint_t:
            active.append((l, cp2.last_checkpoint.get(l, 0)))
        else:
            report.advanced.append(l)
    repaired = {}
    # a feedback loop through direct reads fixes at least one more tick per pass
    for _ in range(1 if settles else checkpoint_t - start + 1):
        changed = False
        for l, last in active:
            for l2, u, vals in _recalc_inplace(mu, topo, l, last, checkpoint_t, s.feeds):
                repaired[(l2, u)] = vals
                changed = True
        if not changed:
            break
    for l, _ in active:
        cp2.last_checkpoint[l] = checkpoint_t
        report.advanced.append(l)
    report.repaired = [(l, u, v) for (l, u), v in repaired.items()]
    report.blocked.sort()
    report.advanced.sort()
    return mu, cp2, report


# ------------------------------------------------------ re-execution oracle

def check_hypotheses(s):
    if s.t < 1:
        raise HypothesisViolation("needs t >= 1")
    if any(u >= s.t for u in s.phi.times()):
        raise HypothesisViolation("switch history has snapshots at or after t")
    if s.phi.at(s.t) != s.nu:
        raise HypothesisViolation("latest snapshot is not the live process environment")
    for l, entry in s.mu.items():
        times = entry.relation.times()
        if times and times[-1] >= s.t:
            raise HypothesisViolation(f"{l} already has a record at or after t={s.t}")


def theorem2_conclusions(s, deliver, **kw):
    """Run the three branches and evaluate each conclusion separately."""
    check_hypotheses(s)
    a = step(s, None, **kw)
    b = step(s, deliver, **kw)
    mu2 = b.state_after.mu
    s3 = MachineState(mu2, s.phi.at(s.t - 1), b.state_after.phi, s.t, s.expr, s.feeds)
    c = step(s3, None, **kw)
    A, C = a.state_after, c.state_after
    fired = a.outcome.fired
    return {
        "records_below_t": equiv_records_upto(A.mu, C.mu, s.t - 1),
        "records_at_t_fired": equiv_records_at(A.mu, C.mu, s.t, fired),
        "records_upto_t": equiv_records_upto(A.mu, C.mu, s.t),
        "tm": equiv_tm(A.mu, C.mu),
        "mode": equiv_mode(A.mu, C.mu),
        "nu": A.nu == C.nu,
        "history": history_equiv_upto(A.phi, C.phi, s.t),
        "expr": A.expr == C.expr,
        "time": A.t == C.t,
    }


def theorem2_oracle(s, deliver, **kw):
    return all(theorem2_conclusions(s, deliver, **kw).values())
