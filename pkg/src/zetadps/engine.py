"""Reduction relations: pure, explicit, process, propagation, and the time step.

Propagation runs the process rules to a fixpoint under a canonical schedule:
the enabled process with the smallest id fires next, and the scan restarts
after every fire. Emitted output channels are readable by every downstream
consumer, and each process fires at most once per propagation.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Optional, Tuple

from .consistency import wellformed_instance
from .env import SwitchHistory, check_acyclic, copy_ident_env, env_update
from .errors import (CyclicSwitch, EffectStuck, IllTimedSwitch, IncompletePropagation,
                     Stuck, UnknownId)
from .store import prev_tick
from .terms import (EXPLICIT, Apply, Explicit, Feed, FieldSignal, FieldUpstream, Guarded, Id, Join,
                    MethodAccess, ObjectLiteral, Propagation, Seq, SetUpstreams, Source,
                    _decompose_pure, decompose, intern_value, is_value, plug, show,
                    substitute)

#: Step budget for a single pure evaluation; guards against divergent methods.
PURE_FUEL = 10_000

SUMMARY_WIDTH = 120


@dataclass(frozen=True)
class SourceFeeds:
    """External data for source instances, keyed by (id, signal, tick).

    ``on_demand`` sources (timing "anytime") fire only at ticks that carry
    a stream value. Periodic sources fire on their own schedule and take the
    stream value when present, else their declared effect.
    """
    streams: Dict[Tuple[str, str, int], str] = field(default_factory=dict)
    on_demand: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "_fed", frozenset((l, t) for l, _, t in self.streams))

    def active(self, l, t):
        return l not in self.on_demand or (l, t) in self._fed

    def value(self, l, p, t):
        return self.streams.get((l, p, t))


@dataclass(frozen=True)
class MachineState:
    mu: dict
    nu: dict
    phi: SwitchHistory
    t: int
    expr: object
    feeds: Optional[SourceFeeds] = None

    def copy(self):
        return replace(self, mu=copy_ident_env(self.mu))


@dataclass(frozen=True)
class PropagationOutcome:
    mu_after: dict
    fired: Tuple[str, ...]
    complete: bool
    eligible: FrozenSet[str] = frozenset()
    lost: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TraceRecord:
    t: int
    kind: str
    subject: str
    detail: Optional[str] = None

    def render(self):
        cells = [str(self.t), self.kind, self.subject]
        if self.detail is not None:
            cells.append(self.detail)
        return "\t".join(cells)


@dataclass(frozen=True)
class StepReport:
    state_after: MachineState
    outcome: PropagationOutcome
    explicit_rule: str
    trace: Tuple[TraceRecord, ...] = ()


def render_trace(records):
    return "".join(r.render() + "\n" for r in records)


# ----------------------------------------------------------- pure reduction

def _read_time(mode, l0, t):
    if isinstance(mode, Propagation) and l0 in mode.computed:
        return t
    return prev_tick(t)


def _read_signal(mu, mode, t, l0, p, e):
    entry = mu.get(l0)
    if entry is None:
        raise Stuck(e, f"{l0} is not registered in the resolver")
    R = entry.relation
    if p not in R.schema:
        raise Stuck(e, f"{l0} has no signal {p}")
    return R.latest_row(_read_time(mode, l0, t))[R.schema.index(p)]


def _upstream(nu, l0, s, e):
    proc = nu.get(l0)
    if not isinstance(proc, Guarded) or s not in proc.slots:
        raise Stuck(e, f"{l0} has no upstream slot {s}")
    return proc.join.inputs[proc.slots.index(s)]


def _method_body(nu, l0, m, e):
    proc = nu.get(l0)
    for meth in getattr(proc, "methods", ()):
        if meth.name == m:
            return substitute(meth.body, meth.self_var, l0)
    raise Stuck(e, f"{l0} has no method {m}")


def _feed(feeds, r, t):
    if feeds is not None:
        v = feeds.value(r.source, r.signal, t)
        if v is not None:
            return v
    return r.default


def _contract_pure(mu, nu, t, mode, r, feeds=None):
    if isinstance(r, Feed):
        return Id(_feed(feeds, r, t))
    if isinstance(r, FieldSignal):
        return Id(_read_signal(mu, mode, t, r.recv.name, r.name, r))
    if isinstance(r, FieldUpstream):
        return Id(_upstream(nu, r.recv.name, r.name, r))
    if isinstance(r, MethodAccess):
        return _method_body(nu, r.recv.name, r.name, r)
    if isinstance(r, Apply):
        return Id(intern_value(r.fn, [a.name for a in r.args]))
    if isinstance(r, Seq) and isinstance(mode, Explicit):
        return r.rest
    raise Stuck(r)


def pure_step(mu, nu, t, mode, e, feeds=None):
    """One pure reduction step under the ``E.p | E.s | E.m`` context grammar."""
    d = _decompose_pure(e, ())
    if d is None:
        raise Stuck(e)
    ctx, r = d
    return plug(ctx, _contract_pure(mu, nu, t, mode, r, feeds))


def reduce_pure(mu, nu, t, mode, e, fuel=PURE_FUEL, feeds=None):
    """Iterate ``pure_step`` to a value (reference route for ``evaluate``)."""
    while not is_value(e):
        if fuel <= 0:
            raise Stuck(e, "out of fuel")
        e = pure_step(mu, nu, t, mode, e, feeds)
        fuel -= 1
    return e.name


class _Fuel:
    __slots__ = ("left", "feeds")

    def __init__(self, n, feeds=None):
        self.left = n
        self.feeds = feeds

    def burn(self, e):
        self.left -= 1
        if self.left < 0:
            raise Stuck(e, "out of fuel")


def _eval(mu, nu, t, mode, e, fuel):
    if isinstance(e, Id):
        return e.name
    fuel.burn(e)
    if isinstance(e, FieldSignal):
        return _read_signal(mu, mode, t, _eval(mu, nu, t, mode, e.recv, fuel), e.name, e)
    if isinstance(e, FieldUpstream):
        return _upstream(nu, _eval(mu, nu, t, mode, e.recv, fuel), e.name, e)
    if isinstance(e, MethodAccess):
        l0 = _eval(mu, nu, t, mode, e.recv, fuel)
        return _eval(mu, nu, t, mode, _method_body(nu, l0, e.name, e), fuel)
    if isinstance(e, Apply):
        return intern_value(e.fn, [_eval(mu, nu, t, mode, a, fuel) for a in e.args])
    if isinstance(e, Feed):
        return _feed(fuel.feeds, e, t)
    raise Stuck(e, "not a pure expression")


def evaluate(mu, nu, t, mode, e, fuel=PURE_FUEL, feeds=None):
    """Big-step pure evaluation; agrees with ``reduce_pure`` on every input."""
    return _eval(mu, nu, t, mode, e, _Fuel(fuel, feeds))


# ------------------------------------------------------- explicit reduction

def _build_process(mu, nu, lit):
    l = lit.label
    if l not in mu:
        raise UnknownId(f"object label {l} is not registered in the resolver")
    names = tuple(p for p, _ in lit.signals)
    if names != mu[l].relation.schema:
        raise Stuck(lit, f"signals {names} do not match schema {mu[l].relation.schema}")
    effects = tuple(e for _, e in lit.signals)
    if not lit.upstreams:
        return Source(l, names, effects, lit.methods)
    inputs = tuple(u.name for _, u in lit.upstreams)
    return Guarded(_join(lit, mu[l].mode, inputs), l, names, effects, lit.methods,
                   tuple(s for s, _ in lit.upstreams))


def _join(e, mode, inputs):
    try:
        return Join(mode, inputs)
    except ValueError as exc:
        raise Stuck(e, str(exc)) from None


def _rebind(mu, nu, e, l, proc):
    for i in proc.inputs:
        if i not in nu:
            raise UnknownId(f"upstream {i} of {l} is not instantiated")
    nu2 = env_update(nu, l, proc)
    if not check_acyclic(nu2):
        raise CyclicSwitch(f"{show(e)} would make the network cyclic")
    if not wellformed_instance(mu, nu2, l):
        raise IllTimedSwitch(f"{show(e)} breaks the timing of {l}")
    return nu2


def explicit_step(mu, t, nu, phi, e):
    """One explicit reduction; returns ``(nu', phi', e', rule)``."""
    if is_value(e):
        return nu, phi, e, "NOOP"
    d = decompose(e, EXPLICIT)
    if d is None:
        raise Stuck(e)
    ctx, r = d
    if isinstance(r, ObjectLiteral):
        nu2 = _rebind(mu, nu, r, r.label, _build_process(mu, nu, r))
        return nu2, phi.record(t, nu2), plug(ctx, Id(r.label)), "R-OBJ"
    if isinstance(r, SetUpstreams):
        l = r.recv.name
        proc = nu.get(l)
        if proc is None or isinstance(proc, Source) and r.args:
            raise Stuck(r, f"{l} has no upstreams to replace")
        new_inputs = tuple(a.name for a in r.args)
        if len(new_inputs) != len(proc.inputs):
            raise Stuck(r, f"{l} expects {len(proc.inputs)} upstreams")
        if isinstance(proc, Guarded):
            proc = replace(proc, join=_join(r, proc.join.kind, new_inputs))
        nu2 = _rebind(mu, nu, r, l, proc)
        return nu2, phi.record(t, nu2), plug(ctx, Id(l)), "R-SETU"
    return nu, phi, plug(ctx, _contract_pure(mu, nu, t, EXPLICIT, r)), "R-PURE"


# -------------------------------------------------------- process reduction

def eligible_set(mu, nu, t, feeds=None):
    out = set()
    for l, proc in nu.items():
        entry = mu.get(l)
        if entry is None or t % entry.tm:
            continue
        if isinstance(proc, Source) and feeds is not None and not feeds.active(l, t):
            continue
        out.add(l)
    return frozenset(out)


def _guard_open(proc, emitted):
    if isinstance(proc, Source):
        return True
    if proc.join.kind.value == "union":
        return any(i in emitted for i in proc.join.inputs)
    return all(i in emitted for i in proc.join.inputs)


def process_step(nu_init, t, mu, inflight, fired, deliver=None, feeds=None):
    """Fire the first process (in schedule order) that some rule admits.

    ``inflight`` maps ids to their in-propagation form (``Source``/``Guarded``
    until fired, then ``Emitted``). Relations in ``mu`` are updated in place.
    Returns the fired id, or None at a normal form.
    """
    emitted = set(fired)
    for l in sorted(inflight):
        proc = inflight[l]
        if l in emitted or not isinstance(proc, (Source, Guarded)):
            continue
        entry = mu.get(l)
        if entry is None:
            raise UnknownId(f"process {l} has no resolver entry")
        if t % entry.tm:
            continue
        if deliver is not None and l not in deliver:
            continue
        if isinstance(proc, Source) and feeds is not None and not feeds.active(l, t):
            continue
        if not _guard_open(proc, emitted):
            continue
        mode = Propagation(frozenset(fired))
        vals = []
        for p, eff in zip(proc.signals, proc.effects):
            v = feeds.value(l, p, t) if feeds is not None and isinstance(proc, Source) else None
            if v is None:
                try:
                    v = evaluate(mu, nu_init, t, mode, eff, feeds=feeds)
                except Stuck as exc:
                    raise EffectStuck(exc.expr, f"effect {p} of {l}: {exc.reason}") from None
            vals.append(v)
        entry.relation.put(t, vals)
        inflight[l] = _emitted(l)
        fired.append(l)
        return l
    return None


_EMITTED_CACHE = {}


def _emitted(l):
    from .terms import Emitted
    e = _EMITTED_CACHE.get(l)
    if e is None:
        e = _EMITTED_CACHE[l] = Emitted(l)
    return e


def _propagate_inplace(nu, t, mu, deliver=None, feeds=None, strict=False):
    undo = []
    for l in nu:
        if l in mu:
            undo.append((l, mu[l].relation.row_at(t)))
    inflight = dict(nu)
    fired = []
    try:
        while process_step(nu, t, mu, inflight, fired, deliver, feeds) is not None:
            pass
    except Exception:
        for l, row in undo:
            R = mu[l].relation
            if row is None:
                if R.row_at(t) is not None:
                    R._rows.pop(t)
                    R._times.remove(t)
            else:
                R.put(t, row)
        raise
    eligible = eligible_set(mu, nu, t, feeds)
    complete = set(fired) == eligible
    if strict and deliver is None and not complete:
        missing = sorted(eligible - set(fired))
        raise IncompletePropagation(f"t={t}: eligible but unfired {missing}")
    lost = tuple(sorted(eligible - set(deliver))) if deliver is not None else ()
    return PropagationOutcome(mu, tuple(fired), complete, eligible, lost)


def propagate(nu, t, mu, deliver=None, feeds=None, strict=False):
    """Big-step propagation; ``deliver`` restricts which ids may fire."""
    return _propagate_inplace(nu, t, copy_ident_env(mu), deliver, feeds, strict)


def schedule_order(nu, t, mu, feeds=None):
    """Firing order of a loss-free propagation, guards only (no effects).

    Mirrors ``process_step``: after every fire the scan restarts from the
    smallest id.
    """
    emitted = []
    seen = set()
    ready = []
    for l in sorted(nu):
        entry = mu.get(l)
        if entry is None or t % entry.tm:
            continue
        if isinstance(nu[l], Source) and feeds is not None and not feeds.active(l, t):
            continue
        ready.append(l)
    while True:
        for l in ready:
            if l not in seen and _guard_open(nu[l], seen):
                seen.add(l)
                emitted.append(l)
                break
        else:
            return emitted


# ---------------------------------------------------------------- time step

def _summary(e):
    text = show(e)
    return text if len(text) <= SUMMARY_WIDTH else text[:SUMMARY_WIDTH - 3] + "..."


def step(s, deliver=None, *, topology="post", strict=False, inplace=False):
    """One time step: an explicit reduction and a propagation, then ``t + 1``.

    ``topology`` picks the process environment the propagation runs under:
    ``"post"`` (default) uses the environment after the explicit reduction,
    ``"pre"`` the one before it.
    """
    if topology not in ("post", "pre"):
        raise ValueError(f"topology must be 'post' or 'pre', not {topology!r}")
    nu2, phi2, e2, rule = explicit_step(s.mu, s.t, s.nu, s.phi, s.expr)
    mu = s.mu if inplace else copy_ident_env(s.mu)
    nu_prop = nu2 if topology == "post" else s.nu
    outcome = _propagate_inplace(nu_prop, s.t, mu, deliver, s.feeds, strict)
    trace = [TraceRecord(s.t, "RULE", rule, _summary(e2))]
    for l in outcome.fired:
        R = mu[l].relation
        vals = ",".join(f"{p}={v}" for p, v in zip(R.schema, R.row_at(s.t)))
        trace.append(TraceRecord(s.t, "FIRE", l, vals))
    trace.extend(TraceRecord(s.t, "LOST", l) for l in outcome.lost)
    after = MachineState(mu, nu2, phi2, s.t + 1, e2, s.feeds)
    return StepReport(after, outcome, rule, tuple(trace))


def run(s0, ticks, loss_schedule=None, **kw):
    """Iterate ``step``; ticks in ``loss_schedule`` drop the listed ids."""
    loss_schedule = loss_schedule or {}
    for t, lost in loss_schedule.items():
        unknown = set(lost) - set(s0.mu)
        if unknown:
            raise UnknownId(f"loss schedule at t={t} names unknown ids {sorted(unknown)}")
    state = s0.copy()
    trace = []
    for _ in range(ticks):
        lost = loss_schedule.get(state.t)
        deliver = None if lost is None else frozenset(state.mu) - frozenset(lost)
        report = step(state, deliver, inplace=True, **kw)
        state = report.state_after
        trace.extend(report.trace)
    return state, trace
