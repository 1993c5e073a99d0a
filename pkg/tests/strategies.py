"""Hypothesis strategies over the term language."""
from hypothesis import strategies as st

from zetadps.terms import (Apply, FieldSignal, FieldUpstream, Id, Method, MethodAccess,
                           ObjectLiteral, Seq, SetUpstreams, Var)

ids = st.sampled_from(["l0", "l1", "l2", "l3"]).map(Id)
names = st.sampled_from(["p", "q", "r"])
variables = st.sampled_from(["x", "y"]).map(Var)


def _member(children):
    return st.one_of(
        st.builds(FieldSignal, children, names),
        st.builds(FieldUpstream, children, names),
        st.builds(MethodAccess, children, names),
        st.builds(Apply, st.sampled_from(["f", "g"]),
                  st.lists(children, max_size=3).map(tuple)),
    )


pure_exprs = st.recursive(ids, _member, max_leaves=8)
open_exprs = st.recursive(st.one_of(ids, variables), _member, max_leaves=8)


def _explicit(children):
    obj = st.builds(
        lambda lab, ups: ObjectLiteral(lab, (("p", Id("v")),),
                                       tuple((f"s{i}", u) for i, u in enumerate(ups))),
        st.sampled_from(["l5", "l6"]), st.lists(children, max_size=3))
    return st.one_of(
        _member(children),
        obj,
        st.builds(SetUpstreams, children, st.lists(children, max_size=3).map(tuple)),
        st.builds(Seq, children, children),
    )


explicit_exprs = st.recursive(ids, _explicit, max_leaves=10)


def with_methods(body):
    return st.builds(lambda b, x: ObjectLiteral("l9", (), (), (Method("m", x, b),)),
                     body, st.sampled_from(["x", "y"]))
