"""The five-node example network and the upstream-switch driver, built directly."""
from __future__ import annotations

from .engine import MachineState
from .env import ResolverEntry, SwitchHistory
from .store import Relation
from .terms import (Apply, FieldSignal, FieldUpstream, Guarded, Id, Join, Mode, ObjectLiteral,
                    SetUpstreams, Source)

U, I = Mode.UNION, Mode.INTERSECTION


def _read(l, slot, p):
    return FieldSignal(FieldUpstream(Id(l), slot), p)


def five_node(tm=1):
    """``l5 = E(l3 = C(l1 = A, l2 = B), l4 = D)`` with C a union, E an intersection."""
    mu = {
        "l1": ResolverEntry(Relation(("a",)), tm, U),
        "l2": ResolverEntry(Relation(("b",)), tm, U),
        "l3": ResolverEntry(Relation(("c",)), tm, U),
        "l4": ResolverEntry(Relation(("d",)), tm, U),
        "l5": ResolverEntry(Relation(("e",)), tm, I),
    }
    nu = {
        "l1": Source("l1", ("a",), (Id("la"),)),
        "l2": Source("l2", ("b",), (Id("lb"),)),
        "l3": Guarded(Join(U, ("l1", "l2")), "l3", ("c",),
                      (Apply("m", (_read("l3", "a", "a"), _read("l3", "b", "b"))),),
                      slots=("a", "b")),
        "l4": Source("l4", ("d",), (Id("ld"),)),
        "l5": Guarded(Join(I, ("l3", "l4")), "l5", ("e",),
                      (Apply("n", (_read("l5", "c", "c"), _read("l5", "d", "d"))),),
                      slots=("c", "d")),
    }
    return mu, nu


def five_node_state(t=1, expr=Id("unit"), tm=1):
    mu, nu = five_node(tm)
    return MachineState(mu, nu, SwitchHistory({0: nu}), t, expr)


def switch_driver():
    """``l5.setu(l3, l6[d = ld2])``."""
    return SetUpstreams(Id("l5"), (Id("l3"), ObjectLiteral("l6", (("d", Id("ld2")),))))


def switch_state(t=1, tm=1):
    mu, nu = five_node(tm)
    mu["l6"] = ResolverEntry(Relation(("d",)), tm, U)
    return MachineState(mu, nu, SwitchHistory({0: nu}), t, switch_driver())
