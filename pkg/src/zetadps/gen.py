"""Random well-formed machine states for the property oracles.

Everything is drawn from one ``random.Random(seed)`` so a case is fully
identified by its seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .consistency import combine_tm
from .engine import MachineState
from .env import ResolverEntry, SwitchHistory, downstream_closure
from .store import Relation
from .terms import (Apply, FieldSignal, FieldUpstream, Guarded, Id, Join, Method, MethodAccess,
                    Mode, ObjectLiteral, Seq, SetUpstreams, Source, Var)

TMS = (1, 2, 3, 4, 6, 12)


@dataclass(frozen=True)
class GenConfig:
    min_nodes: int = 2
    max_nodes: int = 8
    max_inputs: int = 3
    max_t: int = 30
    # chance that t is a multiple of 12, so every registered node is due
    aligned_t: float = 0.5
    history_density: float = 0.6
    stale_rows: bool = False


@dataclass(frozen=True)
class Case:
    seed: int
    state: MachineState
    driver_kind: str


def _value(rng, prefix="v"):
    return Id(f"{prefix}{rng.randrange(6)}")


def _signals(rng, l):
    # every node has p0, so a switched-in upstream always answers slot reads
    return tuple(f"p{i}" for i in range(rng.randint(1, 2)))


def _source_effect(rng, l, own):
    if rng.random() < 0.3:
        # reads its own previous value
        return Apply("g", (FieldSignal(Id(l), own), _value(rng)))
    return _value(rng, "k")


def _guarded_effect(rng, l, slots, schemas, others):
    reads = []
    for s in slots:
        if rng.random() < 0.8:
            reads.append(FieldSignal(FieldUpstream(Id(l), s), "p0"))
    if rng.random() < 0.2 and others:
        o = rng.choice(others)
        reads.append(FieldSignal(Id(o), rng.choice(schemas[o])))
    if rng.random() < 0.2:
        reads.append(MethodAccess(Id(l), "peek"))
    if not reads:
        return _value(rng)
    return Apply(rng.choice(("f", "h")), tuple(reads))


def _peek_method(l, schema):
    return Method("peek", "x", FieldSignal(Var("x"), schema[0]))


def _random_history(rng, R, tm, t, density):
    for u in range(tm, t, tm):
        if rng.random() < density:
            R.put(u, tuple(f"h{rng.randrange(4)}" for _ in R.schema))


def _build_node(rng, l, nodes, mu, schemas, cfg, allow_guarded=True):
    sigs = _signals(rng, l)
    schemas[l] = sigs
    if not nodes or not allow_guarded or rng.random() < 0.35:
        tm = rng.choice(TMS)
        mode = rng.choice((Mode.UNION, Mode.INTERSECTION))
        mu[l] = ResolverEntry(Relation(sigs), tm, mode)
        proc = Source(l, sigs, tuple(_source_effect(rng, l, sigs[0]) for _ in sigs),
                      (_peek_method(l, sigs),))
        return proc
    k = rng.randint(1, min(cfg.max_inputs, len(nodes)))
    inputs = tuple(rng.sample(nodes, k))
    mode = rng.choice((Mode.UNION, Mode.INTERSECTION))
    tm = combine_tm(mode, [mu[i].tm for i in inputs])
    mu[l] = ResolverEntry(Relation(sigs), tm, mode)
    slots = tuple(f"s{j}" for j in range(k))
    others = [o for o in nodes if o not in inputs]
    effects = tuple(_guarded_effect(rng, l, slots, schemas, others) for _ in sigs)
    return Guarded(Join(mode, inputs), l, sigs, effects, (_peek_method(l, sigs),), slots)


def _literal(proc, slot_args):
    sig = tuple(zip(proc.signals, proc.effects))
    if isinstance(proc, Source):
        return ObjectLiteral(proc.out, sig, (), proc.methods)
    return ObjectLiteral(proc.out, sig, tuple(zip(proc.slots, slot_args)), proc.methods)


def _setu_args(rng, nu, mu, g):
    proc = nu[g]
    banned = downstream_closure(nu, [g]) | {g}
    pool = [l for l in sorted(nu) if l not in banned]
    k = len(proc.inputs)
    want = mu[g].tm
    for _ in range(20):
        if len(pool) < k:
            break
        cand = tuple(rng.sample(pool, k))
        if combine_tm(mu[g].mode, [mu[i].tm for i in cand]) == want:
            return cand
    return tuple(rng.sample(proc.inputs, k))


def _driver(rng, nu, mu, fresh, fresh_proc, schemas):
    ids = sorted(nu)
    guarded = [l for l in ids if isinstance(nu[l], Guarded)]
    roll = rng.random()
    if roll < 0.2:
        return "value", _value(rng)
    if roll < 0.4:
        l = rng.choice(ids)
        read = FieldSignal(Id(l), rng.choice(schemas[l]))
        if rng.random() < 0.5:
            read = Apply("f", (read, MethodAccess(Id(l), "peek")))
        return "pure", read
    if roll < 0.7 and fresh is not None:
        args = []
        for i in fresh_proc.inputs:
            # route some upstream arguments through a reducible expression
            hit = [g for g in guarded if i in nu[g].inputs]
            if hit and rng.random() < 0.4:
                g = rng.choice(hit)
                args.append(FieldUpstream(Id(g), nu[g].slots[nu[g].inputs.index(i)]))
            else:
                args.append(Id(i))
        lit = _literal(fresh_proc, tuple(args))
        if rng.random() < 0.3:
            return "obj", Seq(lit, _value(rng))
        return "obj", lit
    if guarded:
        g = rng.choice(guarded)
        return "setu", SetUpstreams(Id(g), tuple(Id(i) for i in _setu_args(rng, nu, mu, g)))
    return "value", _value(rng)


def generate(seed, cfg=GenConfig()):
    """A well-formed state with history strictly before ``t``.

    With ``cfg.stale_rows`` some due nodes also carry a row at ``t`` that
    the step must overwrite.
    """
    rng = random.Random(seed)
    n = rng.randint(cfg.min_nodes, cfg.max_nodes)
    names = [f"n{i}" for i in range(n)]
    mu, nu, schemas = {}, {}, {}
    for l in names:
        nu[l] = _build_node(rng, l, list(nu), mu, schemas, cfg)
    # one pre-registered id for object creation drivers
    fresh = f"n{n}"
    fresh_proc = _build_node(rng, fresh, list(nu), mu, schemas, cfg)
    if rng.random() < cfg.aligned_t:
        t = rng.choice((12, 24))
    else:
        t = rng.randint(1, cfg.max_t)
    for l in names:
        _random_history(rng, mu[l].relation, mu[l].tm, t, cfg.history_density)
        if cfg.stale_rows and t % mu[l].tm == 0 and rng.random() < 0.3:
            mu[l].relation.put(t, tuple("stale" for _ in schemas[l]))
    snaps = {}
    if t > 1 and rng.random() < 0.5:
        # an older, smaller topology: only the first few nodes
        cut = rng.randint(1, n)
        older = {l: nu[l] for l in names[:cut]
                 if all(i in names[:cut] for i in nu[l].inputs)}
        snaps[0] = older
        snaps[rng.randint(1, t - 1)] = dict(nu)
    else:
        snaps[rng.randint(0, t - 1)] = dict(nu)
    kind, expr = _driver(rng, nu, mu, fresh, fresh_proc, schemas)
    state = MachineState(mu, dict(nu), SwitchHistory(snaps), t, expr)
    return Case(seed, state, kind)


def random_deliver(rng, state):
    ids = sorted(state.mu)
    k = rng.randint(0, len(ids))
    return frozenset(rng.sample(ids, k))
