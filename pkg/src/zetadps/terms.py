"""Term language: expressions, processes, evaluation contexts.

Identifiers are plain strings. An expression is a value iff it is an ``Id``.
Two small extensions sit beside the object-calculus core: ``Apply`` is an
uninterpreted n-ary value constructor (used by the DSL for ``f(...)``, ``+``
and friends), ``Seq`` sequences driver statements, and ``Feed`` reads an
external input stream of a source (its default when nothing arrived).
"""
from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Tuple, Union


class Mode(enum.Enum):
    UNION = "union"
    INTERSECTION = "intersection"

    @property
    def short(self):
        return "U" if self is Mode.UNION else "I"

    @classmethod
    def parse(cls, text):
        text = text.strip().lower()
        if text in ("union", "u", "∪"):
            return cls.UNION
        if text in ("intersection", "i", "∩"):
            return cls.INTERSECTION
        raise ValueError(f"unknown join mode {text!r}")


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Id:
    name: str


@dataclass(frozen=True)
class FieldSignal:
    recv: "Expr"
    name: str


@dataclass(frozen=True)
class FieldUpstream:
    recv: "Expr"
    name: str


@dataclass(frozen=True)
class MethodAccess:
    recv: "Expr"
    name: str


@dataclass(frozen=True)
class Method:
    name: str
    self_var: str
    body: "Expr"


@dataclass(frozen=True)
class ObjectLiteral:
    label: str
    signals: Tuple[Tuple[str, "Expr"], ...] = ()
    upstreams: Tuple[Tuple[str, "Expr"], ...] = ()
    methods: Tuple[Method, ...] = ()

    def __post_init__(self):
        names = [p for p, _ in self.signals] + [s for s, _ in self.upstreams]
        names += [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate member names in object {self.label}")


@dataclass(frozen=True)
class SetUpstreams:
    recv: "Expr"
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class Apply:
    fn: str
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class Seq:
    first: "Expr"
    rest: "Expr"


@dataclass(frozen=True)
class Feed:
    """External value of signal ``signal`` of source ``source`` at the current tick."""
    source: str
    signal: str
    default: str


Expr = Union[Var, Id, FieldSignal, FieldUpstream, MethodAccess, ObjectLiteral,
             SetUpstreams, Apply, Seq, Feed]


def is_value(e):
    return isinstance(e, Id)


def intern_value(fn, args):
    """Deterministic identifier for an opaque constructor application."""
    name = f"{fn}({','.join(args)})"
    if len(name) <= 64:
        return name
    digest = hashlib.sha1(name.encode("utf-8")).hexdigest()[:12]
    return f"{fn}#{digest}"


# ------------------------------------------------------------------ processes

@dataclass(frozen=True)
class Join:
    kind: Mode
    inputs: Tuple[str, ...]

    def __post_init__(self):
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError(f"join inputs must be distinct: {self.inputs}")


@dataclass(frozen=True)
class Source:
    out: str
    signals: Tuple[str, ...] = ()
    effects: Tuple[Expr, ...] = ()
    methods: Tuple[Method, ...] = ()

    @property
    def inputs(self):
        return ()

    @property
    def slots(self):
        return ()


@dataclass(frozen=True)
class Guarded:
    join: Join
    out: str
    signals: Tuple[str, ...] = ()
    effects: Tuple[Expr, ...] = ()
    methods: Tuple[Method, ...] = ()
    # upstream slot names, parallel to join.inputs
    slots: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.slots and len(self.slots) != len(self.join.inputs):
            raise ValueError("slot names and join inputs differ in length")

    @property
    def inputs(self):
        return self.join.inputs


@dataclass(frozen=True)
class Emitted:
    out: str

    @property
    def inputs(self):
        return ()


Process = Union[Source, Guarded, Emitted]


def process_kind(p):
    if isinstance(p, Guarded):
        return p.join.kind.short
    if isinstance(p, Source):
        return "S"
    return "E"


# -------------------------------------------------------------- eval modes

@dataclass(frozen=True)
class Explicit:
    pass


@dataclass(frozen=True)
class Propagation:
    computed: frozenset = field(default_factory=frozenset)


EXPLICIT = Explicit()
EvalMode = Union[Explicit, Propagation]


# --------------------------------------------------------------- substitution

def substitute(body, x, l):
    """Replace free ``Var(x)`` in ``body`` with ``Id(l)``."""
    if isinstance(body, Var):
        return Id(l) if body.name == x else body
    if isinstance(body, (Id, Feed)):
        return body
    if isinstance(body, (FieldSignal, FieldUpstream, MethodAccess)):
        return type(body)(substitute(body.recv, x, l), body.name)
    if isinstance(body, ObjectLiteral):
        return ObjectLiteral(
            body.label,
            tuple((p, substitute(e, x, l)) for p, e in body.signals),
            tuple((s, substitute(e, x, l)) for s, e in body.upstreams),
            tuple(m if m.self_var == x else Method(m.name, m.self_var, substitute(m.body, x, l))
                  for m in body.methods),
        )
    if isinstance(body, SetUpstreams):
        return SetUpstreams(substitute(body.recv, x, l),
                            tuple(substitute(a, x, l) for a in body.args))
    if isinstance(body, Apply):
        return Apply(body.fn, tuple(substitute(a, x, l) for a in body.args))
    if isinstance(body, Seq):
        return Seq(substitute(body.first, x, l), substitute(body.rest, x, l))
    raise TypeError(f"not an expression: {body!r}")


def free_vars(e):
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Id, Feed)):
        return set()
    if isinstance(e, (FieldSignal, FieldUpstream, MethodAccess)):
        return free_vars(e.recv)
    if isinstance(e, ObjectLiteral):
        out = set()
        for _, s in e.signals + e.upstreams:
            out |= free_vars(s)
        for m in e.methods:
            out |= free_vars(m.body) - {m.self_var}
        return out
    if isinstance(e, SetUpstreams):
        out = free_vars(e.recv)
        for a in e.args:
            out |= free_vars(a)
        return out
    if isinstance(e, Apply):
        out = set()
        for a in e.args:
            out |= free_vars(a)
        return out
    if isinstance(e, Seq):
        return free_vars(e.first) | free_vars(e.rest)
    raise TypeError(f"not an expression: {e!r}")


def read_ids(e):
    """Ids whose signals or methods ``e`` reaches through a literal receiver."""
    if isinstance(e, (FieldSignal, MethodAccess)) and isinstance(e.recv, Id):
        return {e.recv.name}
    if isinstance(e, (FieldSignal, FieldUpstream, MethodAccess)):
        return read_ids(e.recv)
    if isinstance(e, Apply):
        return set().union(*(read_ids(a) for a in e.args))
    return set()


# -------------------------------------------------------- evaluation contexts
#
# A context is a tuple of frames, outermost first. Each frame knows how to
# rebuild its node around a filled hole.

@dataclass(frozen=True)
class MemberFrame:
    """``[].name`` for signal, upstream or method access."""
    kind: type
    name: str

    def fill(self, e):
        return self.kind(e, self.name)


@dataclass(frozen=True)
class ApplyFrame:
    fn: str
    done: Tuple[Expr, ...]
    rest: Tuple[Expr, ...]

    def fill(self, e):
        return Apply(self.fn, self.done + (e,) + self.rest)


@dataclass(frozen=True)
class SlotFrame:
    """Hole in one upstream slot of an object literal; earlier slots are ids."""
    label: str
    signals: tuple
    done: tuple
    slot: str
    rest: tuple
    methods: tuple

    def fill(self, e):
        return ObjectLiteral(self.label, self.signals,
                             self.done + ((self.slot, e),) + self.rest, self.methods)


@dataclass(frozen=True)
class SetuRecvFrame:
    args: Tuple[Expr, ...]

    def fill(self, e):
        return SetUpstreams(e, self.args)


@dataclass(frozen=True)
class SetuArgFrame:
    recv: Expr
    done: Tuple[Expr, ...]
    rest: Tuple[Expr, ...]

    def fill(self, e):
        return SetUpstreams(self.recv, self.done + (e,) + self.rest)


@dataclass(frozen=True)
class SeqFrame:
    rest: Expr

    def fill(self, e):
        return Seq(e, self.rest)


EvalContext = Tuple[object, ...]
HOLE: EvalContext = ()


def plug(ctx, e):
    for frame in reversed(ctx):
        e = frame.fill(e)
    return e


def _decompose_pure(e, path):
    if isinstance(e, (FieldSignal, FieldUpstream, MethodAccess)):
        if isinstance(e.recv, Id):
            return path, e
        return _decompose_pure(e.recv, path + (MemberFrame(type(e), e.name),))
    if isinstance(e, Apply):
        for i, a in enumerate(e.args):
            if not isinstance(a, Id):
                frame = ApplyFrame(e.fn, e.args[:i], e.args[i + 1:])
                return _decompose_pure(a, path + (frame,))
        return path, e
    if isinstance(e, Feed):
        return path, e
    return None


def _decompose_explicit(e, path):
    if isinstance(e, ObjectLiteral):
        for i, (s, u) in enumerate(e.upstreams):
            if not isinstance(u, Id):
                frame = SlotFrame(e.label, e.signals, e.upstreams[:i], s,
                                  e.upstreams[i + 1:], e.methods)
                return _decompose_explicit(u, path + (frame,))
        return path, e
    if isinstance(e, SetUpstreams):
        if not isinstance(e.recv, Id):
            return _decompose_explicit(e.recv, path + (SetuRecvFrame(e.args),))
        for i, a in enumerate(e.args):
            if not isinstance(a, Id):
                frame = SetuArgFrame(e.recv, e.args[:i], e.args[i + 1:])
                return _decompose_explicit(a, path + (frame,))
        return path, e
    if isinstance(e, Seq):
        if not isinstance(e.first, Id):
            return _decompose_explicit(e.first, path + (SeqFrame(e.rest),))
        return path, e
    return _decompose_pure(e, path)


def decompose(e, mode=EXPLICIT):
    """Split ``e`` into ``(context, redex)`` or return None for values/stuck terms."""
    if isinstance(e, (Id, Var)):
        return None
    if isinstance(mode, Explicit):
        return _decompose_explicit(e, HOLE)
    return _decompose_pure(e, HOLE)


# ---------------------------------------------------------------- rendering

def show(e):
    if isinstance(e, (Id, Var)):
        return e.name
    if isinstance(e, (FieldSignal, FieldUpstream, MethodAccess)):
        return f"{show(e.recv)}.{e.name}"
    if isinstance(e, ObjectLiteral):
        parts = [f"{p} = {show(v)}" for p, v in e.signals]
        parts += [f"{s} = {show(v)}" for s, v in e.upstreams]
        parts += [f"{m.name} = ζ({m.self_var}){show(m.body)}" for m in e.methods]
        return f"{e.label}[{', '.join(parts)}]"
    if isinstance(e, SetUpstreams):
        return f"{show(e.recv)}.setu({', '.join(show(a) for a in e.args)})"
    if isinstance(e, Apply):
        return f"{e.fn}({', '.join(show(a) for a in e.args)})"
    if isinstance(e, Seq):
        return f"{show(e.first)}; {show(e.rest)}"
    if isinstance(e, Feed):
        return f"feed({e.source}.{e.signal}, {e.default})"
    raise TypeError(f"not an expression: {e!r}")


def show_process(p):
    if isinstance(p, Emitted):
        return f"^{p.out}"
    effects = ", ".join(show(e) for e in p.effects)
    body = f"^{p.out}[{effects}]"
    if isinstance(p, Guarded):
        sym = "∪" if p.join.kind is Mode.UNION else "∩"
        return f"{sym}{' '.join(p.join.inputs)}.{body}"
    return body
