from hypothesis import given
from hypothesis import strategies as st

from strategies import explicit_exprs, open_exprs, pure_exprs, with_methods
from zetadps.terms import (EXPLICIT, HOLE, Apply, FieldSignal, FieldUpstream, Id, Join, Method,
                           MethodAccess, Mode, ObjectLiteral, Propagation, SetUpstreams, Var,
                           decompose, free_vars, intern_value, is_value, plug, show, substitute)


def test_substitute_examples():
    assert substitute(Var("x"), "x", "l0") == Id("l0")
    assert substitute(FieldSignal(Var("x"), "p"), "x", "l0") == FieldSignal(Id("l0"), "p")
    assert substitute(MethodAccess(Var("y"), "m"), "x", "l0") == MethodAccess(Var("y"), "m")


def test_substitute_respects_method_shadowing():
    inner = ObjectLiteral("l1", (("p", Var("x")),), (),
                          (Method("m", "x", FieldSignal(Var("x"), "p")),))
    out = substitute(inner, "x", "l0")
    assert out.signals == (("p", Id("l0")),)
    assert out.methods[0].body == FieldSignal(Var("x"), "p")


@given(open_exprs, st.sampled_from(["x", "y"]))
def test_substitute_never_adds_free_variables(e, x):
    out = substitute(e, x, "l0")
    assert free_vars(out) == free_vars(e) - {x}


@given(with_methods(open_exprs))
def test_substitute_into_objects(e):
    assert free_vars(substitute(e, "x", "l0")) <= free_vars(e)


def test_decompose_values_and_setu_argument():
    assert decompose(Id("l"), EXPLICIT) is None
    lit = ObjectLiteral("l6", (("d", Id("ld2")),))
    e = SetUpstreams(Id("l5"), (Id("l3"), lit))
    ctx, redex = decompose(e, EXPLICIT)
    assert redex == lit
    assert show(plug(ctx, Id("hole"))) == "l5.setu(l3, hole)"


def test_decompose_innermost_receiver_first():
    e = FieldSignal(FieldUpstream(Id("l0"), "s"), "p")
    ctx, redex = decompose(e, Propagation(frozenset()))
    assert redex == FieldUpstream(Id("l0"), "s")
    assert plug(ctx, Id("l9")) == FieldSignal(Id("l9"), "p")


def test_pure_context_does_not_enter_objects():
    e = FieldSignal(ObjectLiteral("l6", (), (("s", FieldUpstream(Id("l0"), "s")),)), "p")
    assert decompose(e, Propagation(frozenset())) is None


def test_plug_examples():
    assert plug(HOLE, Id("e")) == Id("e")
    ctx, _ = decompose(FieldSignal(FieldUpstream(Id("l0"), "s"), "p"), EXPLICIT)
    assert plug(ctx, Id("l0")) == FieldSignal(Id("l0"), "p")
    ctx, _ = decompose(SetUpstreams(Id("l5"), (Id("l3"), ObjectLiteral("l6"))), EXPLICIT)
    assert plug(ctx, Id("l6")) == SetUpstreams(Id("l5"), (Id("l3"), Id("l6")))


@given(explicit_exprs)
def test_decompose_round_trip_explicit(e):
    d = decompose(e, EXPLICIT)
    if is_value(e):
        assert d is None
    if d is not None:
        ctx, redex = d
        assert plug(ctx, redex) == e
        # the redex itself is not further decomposable into a smaller redex
        inner = decompose(redex, EXPLICIT)
        assert inner is None or inner[0] == HOLE


@given(pure_exprs)
def test_decompose_round_trip_pure(e):
    d = decompose(e, Propagation(frozenset()))
    if d is not None:
        assert plug(*d) == e


@given(explicit_exprs)
def test_decompose_is_deterministic(e):
    assert decompose(e, EXPLICIT) == decompose(e, EXPLICIT)


def test_object_members_must_be_distinct():
    import pytest
    with pytest.raises(ValueError):
        ObjectLiteral("l", (("p", Id("a")),), (("p", Id("b")),))


def test_join_inputs_distinct():
    import pytest
    with pytest.raises(ValueError):
        Join(Mode.UNION, ("a", "a"))


def test_intern_value_is_deterministic_and_bounded():
    assert intern_value("f", ["a", "b"]) == "f(a,b)"
    long = intern_value("f", ["x" * 40, "y" * 40])
    assert long.startswith("f#") and len(long) == 14
    assert long == intern_value("f", ["x" * 40, "y" * 40])


def test_mode_parse():
    assert Mode.parse("∪") is Mode.UNION
    assert Mode.parse("Intersection") is Mode.INTERSECTION
    assert Apply("f", ()).args == ()
