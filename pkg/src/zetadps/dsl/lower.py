"""Annotation inference/checking and lowering to calculus terms."""
from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Dict, FrozenSet, Optional

from ..engine import MachineState, explicit_step
from ..env import ResolverEntry, SwitchHistory, copy_ident_env
from ..errors import (AnnotationError, ArityMismatch, CyclicWiring, DuplicateId, UnknownClass,
                      UnknownColumn)
from ..store import Relation
from ..terms import (Apply, Feed, FieldSignal, FieldUpstream, Id, Method, MethodAccess, Mode,
                     ObjectLiteral, Seq, SetUpstreams, Var, is_value)
from .parser import BinOp, Call, Let, Member, Name, New, Num, Str, parse_program
from .timing import combine_seconds, describe, seconds_to_ticks, timing_seconds

SELF = "this"
UNIT = Id("unit")


@dataclass(frozen=True)
class AnnotatedClass:
    decl: object
    mode: Mode
    period: Optional[int]  # seconds; None is "anytime"
    inferred: bool

    @property
    def name(self):
        return self.decl.name

    @property
    def is_source(self):
        return not self.decl.upstreams

    @property
    def schema(self):
        return tuple(s.name for s in self.decl.signals)


def class_wiring(classes):
    by_name = {}
    for c in classes:
        if c.name in by_name:
            raise DuplicateId(f"class {c.name} is declared twice")
        by_name[c.name] = c
    wiring = {}
    for c in classes:
        for u in c.upstreams:
            if u.cls not in by_name:
                raise UnknownClass(f"class {c.name} has an upstream of unknown class {u.cls}")
        wiring[c.name] = tuple(u.cls for u in c.upstreams)
    return wiring


def infer_and_check_annotations(classes, wiring=None):
    """Fill in missing timings and reject declared ones that disagree with the joins."""
    if wiring is None:
        wiring = class_wiring(classes)
    by_name = {c.name: c for c in classes}
    try:
        order = list(TopologicalSorter(
            {k: sorted(v) for k, v in sorted(wiring.items())}).static_order())
    except CycleError as exc:
        raise CyclicWiring(f"class wiring has a cycle through {exc.args[1]}") from None
    out = {}
    for name in order:
        c = by_name.get(name)
        if c is None:
            raise UnknownClass(name)
        mode = Mode.parse(c.mode) if c.mode else Mode.UNION
        declared = None if c.timing is None else timing_seconds(c.timing)
        ups = wiring.get(name, ())
        if not ups:
            out[name] = AnnotatedClass(c, mode, declared, c.timing is None)
            continue
        expected = combine_seconds(mode is Mode.UNION, [out[u].period for u in ups])
        if c.timing is not None and declared != expected:
            raise AnnotationError(name, describe(expected), describe(declared))
        out[name] = AnnotatedClass(c, mode, expected, c.timing is None)
    return {c.name: out[c.name] for c in classes}


# ----------------------------------------------------------------- lowering

@dataclass
class LoweredProgram:
    mu: dict
    nu: dict
    phi: SwitchHistory
    expr: object
    checkpoint_intervals: Dict[str, int]
    classes: Dict[str, AnnotatedClass]
    instance_class: Dict[str, str]
    on_demand: FrozenSet[str]
    tick_seconds: int
    variables: Dict[str, str] = field(default_factory=dict)

    def initial_state(self, t=1, feeds=None):
        return MachineState(copy_ident_env(self.mu), dict(self.nu), self.phi, t, self.expr, feeds)


class _Scope:
    """Name resolution for one expression position."""

    def __init__(self, classes, variables, cls=None, self_expr=None, inline=False):
        self.classes = classes
        self.variables = variables
        self.cls = cls
        self.self_expr = self_expr
        self.inline = inline
        self.inlining = ()


def _class_of(e, scope):
    if isinstance(e, Name):
        if e.name in scope.variables:
            return scope.variables[e.name][1]
        if scope.cls is not None:
            if e.name == SELF:
                return scope.cls.name
            for u in scope.cls.decl.upstreams:
                if u.slot == e.name:
                    return u.cls
        return None
    if isinstance(e, Member):
        owner = _class_of(e.recv, scope)
        if owner is None:
            return None
        for u in scope.classes[owner].decl.upstreams:
            if u.slot == e.name:
                return u.cls
    if isinstance(e, New):
        return e.cls
    return None


def _member(recv_expr, owner, name, scope):
    if owner is None:
        return FieldSignal(recv_expr, name)
    decl = scope.classes[owner].decl
    if any(s.name == name for s in decl.signals):
        return FieldSignal(recv_expr, name)
    if any(u.slot == name for u in decl.upstreams):
        return FieldUpstream(recv_expr, name)
    if any(m.name == name for m in decl.methods):
        return MethodAccess(recv_expr, name)
    raise UnknownColumn(f"class {owner} has no member {name!r}")


class _Lowerer:
    def __init__(self, classes, tick_seconds):
        self.classes = classes
        self.tick_seconds = tick_seconds
        self.mu = {}
        self.instance_class = {}

    # expressions ---------------------------------------------------------
    def expr(self, e, scope):
        if isinstance(e, (Num, Str)):
            return Id(e.text)
        if isinstance(e, Name):
            return self.name(e.name, scope)
        if isinstance(e, Member):
            return _member(self.expr(e.recv, scope), _class_of(e.recv, scope), e.name, scope)
        if isinstance(e, BinOp):
            return Apply(e.op, (self.expr(e.left, scope), self.expr(e.right, scope)))
        if isinstance(e, Call):
            return self.call(e, scope)
        if isinstance(e, New):
            if scope.cls is not None:
                raise UnknownClass(f"cannot create {e.cls} inside a signal class body")
            return self.new(e, scope)
        raise TypeError(f"not a surface expression: {e!r}")

    def name(self, n, scope):
        if n in scope.variables:
            return Id(scope.variables[n][0])
        c = scope.cls
        if c is None:
            return Id(n)
        if n == SELF:
            return scope.self_expr
        decl = c.decl
        for u in decl.upstreams:
            if u.slot == n:
                return FieldUpstream(scope.self_expr, n)
        for s in decl.signals:
            if s.name == n:
                if not scope.inline:
                    return FieldSignal(scope.self_expr, n)
                return self.inline_signal(s, scope)
        for m in decl.methods:
            if m.name == n:
                return MethodAccess(scope.self_expr, n)
        return Id(n)

    def inline_signal(self, s, scope):
        if s.name in scope.inlining:
            chain = " -> ".join(scope.inlining + (s.name,))
            raise CyclicWiring(f"signals of {scope.cls.name} depend on each other: {chain}")
        if s.body is None:
            init = s.init if s.init is not None else "l_init"
            if scope.cls.is_source and isinstance(scope.self_expr, Id):
                # externally updated: a stream value when one arrives
                return Feed(scope.self_expr.name, s.name, init)
            return Id(init)
        outer = scope.inlining
        scope.inlining = outer + (s.name,)
        try:
            return self.expr(s.body, scope)
        finally:
            scope.inlining = outer

    def call(self, e, scope):
        args = tuple(self.expr(a, scope) for a in e.args)
        if e.recv is None:
            c = scope.cls
            if c is not None and not args and any(m.name == e.name for m in c.decl.methods):
                return MethodAccess(scope.self_expr, e.name)
            return Apply(e.name, args)
        recv = self.expr(e.recv, scope)
        if e.name == "setUpstreams":
            return SetUpstreams(recv, args)
        owner = _class_of(e.recv, scope)
        if owner is not None and not args:
            if any(m.name == e.name for m in self.classes[owner].decl.methods):
                return MethodAccess(recv, e.name)
        return Apply(e.name, (recv,) + args)

    # instances -----------------------------------------------------------
    def new(self, e, scope):
        ac = self.classes.get(e.cls)
        if ac is None:
            raise UnknownClass(f"unknown signal class {e.cls}")
        if e.id in self.mu:
            raise DuplicateId(f"instance id {e.id!r} is created twice")
        decl = ac.decl
        if len(e.args) != len(decl.upstreams):
            raise ArityMismatch(
                f"new {e.cls}({e.id!r}, ...) takes {len(decl.upstreams)} upstreams, "
                f"got {len(e.args)}")
        initial = tuple(s.init if s.init is not None else "l_init" for s in decl.signals)
        self.mu[e.id] = ResolverEntry(
            Relation(ac.schema, initial),
            seconds_to_ticks(ac.period, self.tick_seconds), ac.mode)
        self.instance_class[e.id] = e.cls
        inner = _Scope(self.classes, {}, ac, Id(e.id), inline=True)
        signals = tuple((s.name, self.inline_signal(s, inner)) for s in decl.signals)
        ups = tuple((u.slot, self.expr(a, scope)) for u, a in zip(decl.upstreams, e.args))
        mscope = _Scope(self.classes, {}, ac, Var(SELF))
        methods = tuple(Method(m.name, SELF, self.expr(m.body, mscope)) for m in decl.methods)
        return ObjectLiteral(e.id, signals, ups, methods)

    def statements(self, stmts, variables):
        scope = _Scope(self.classes, variables)
        out = []
        for s in stmts:
            if isinstance(s, Let):
                lit = self.new(s.value, scope)
                variables[s.var] = (s.value.id, s.value.cls)
                out.append(lit)
            else:
                out.append(self.expr(s.expr, scope))
        return out


def sequence(exprs):
    if not exprs:
        return UNIT
    e = exprs[-1]
    for x in reversed(exprs[:-1]):
        e = Seq(x, e)
    return e


def _setup(mu, literals):
    """Reduce the network literals eagerly at tick 0."""
    nu, phi = {}, SwitchHistory({0: {}})
    e = sequence(literals)
    while not is_value(e):
        nu, phi, e, _ = explicit_step(mu, 0, nu, phi, e)
    return nu, SwitchHistory({0: nu})


def lower(program, tick_seconds=1):
    """Lower a parsed program to ``(mu seed, nu0, phi0, driver, checkpoint intervals)``."""
    if isinstance(program, str):
        program = parse_program(program)
    if tick_seconds < 1:
        raise ValueError("tick length must be a positive number of seconds")
    classes = infer_and_check_annotations(list(program.classes))
    lw = _Lowerer(classes, tick_seconds)
    variables = {}
    literals = lw.statements(program.network, variables)
    nu, phi = _setup(lw.mu, literals)
    driver = sequence(lw.statements(program.main, variables))
    intervals = {}
    for l, cname in lw.instance_class.items():
        secs = classes[cname].decl.checkpoint_interval
        if secs is not None:
            intervals[l] = seconds_to_ticks(secs, tick_seconds)
    on_demand = frozenset(l for l, cname in lw.instance_class.items()
                          if classes[cname].is_source and classes[cname].period is None)
    return LoweredProgram(lw.mu, nu, phi, driver, intervals, classes,
                          dict(lw.instance_class), on_demand, tick_seconds,
                          {v: lab for v, (lab, _) in variables.items()})
