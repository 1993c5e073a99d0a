from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetadps.consistency import wellformed_env
from zetadps.dsl import (ANYTIME, Every, infer_and_check_annotations, lower, parse_expr,
                         parse_program, parse_timing, timing_to_ticks, unparse_program)
from zetadps.dsl.parser import (BinOp, Call, Member, MethodDecl, Name, Num, SignalClassDecl,
                                SignalDecl, Str, UpstreamField, unparse_expr)
from zetadps.env import dump_history
from zetadps.errors import (AnnotationError, ArityMismatch, CyclicWiring, DSLSyntaxError,
                            DuplicateId, IndivisiblePeriod, UnknownClass, UnknownColumn)
from zetadps.fixtures import five_node
from zetadps.store import dump_rows
from zetadps.terms import Feed, Id, Mode, ObjectLiteral

PROGRAMS = Path(__file__).resolve().parents[1] / "programs"


def src(name):
    return (PROGRAMS / name).read_text()


# ------------------------------------------------------------------ timing

def test_parse_timing_examples():
    assert parse_timing("every 5 sec base 00:00:00") == Every(5, "sec", "00:00:00")
    assert parse_timing("anytime") is ANYTIME
    assert parse_timing("every 2 hour") == Every(2, "hour")
    assert parse_timing("every 1 min base 2024:01:31:23:59:59").base == "2024:01:31:23:59:59"


@pytest.mark.parametrize("text,offset", [
    ("every 0 sec base 00:00:00", 6),
    ("sometimes", 0),
    ("every 5 sec base 25:00:00", 17),
    ("every 5 sec at noon", 11),
])
def test_parse_timing_errors(text, offset):
    with pytest.raises(DSLSyntaxError) as info:
        parse_timing(text)
    assert info.value.offset == offset


def test_timing_to_ticks():
    assert timing_to_ticks(Every(1, "min"), 5) == 12
    assert timing_to_ticks(ANYTIME, 7) == 1
    with pytest.raises(IndivisiblePeriod):
        timing_to_ticks(Every(5, "sec"), 2)


# --------------------------------------------------------------- inference

def _cls(name, timing=None, mode=None, ups=()):
    return SignalClassDecl(name, mode, None if timing is None else parse_timing(timing), None,
                           (SignalDecl("p", True, init="0"),),
                           tuple(UpstreamField(f"s{i}", u) for i, u in enumerate(ups)))


def test_monitor_resolves_to_anytime():
    prog = parse_program(src("monitor.sig"))
    ann = infer_and_check_annotations(prog.classes)
    assert ann["Monitor"].period is None and ann["Monitor"].inferred
    lp = lower(prog, 5)
    assert lp.mu["MyLab"].tm == 1
    assert lp.mu["WebServer"].tm == 1 and lp.mu["DBServer"].tm == 12 and lp.mu["FW"].tm == 1
    assert "FW" in lp.on_demand and lp.checkpoint_intervals["MyLab"] == 60


def test_declared_timings_checked():
    ok = [_cls("A", "every 2 sec"), _cls("B", "every 3 sec"),
          _cls("C", "every 6 sec", "intersection", ("A", "B"))]
    assert infer_and_check_annotations(ok)["C"].period == 6
    bad = [_cls("A", "every 30 sec"), _cls("B", "every 45 sec"),
           _cls("C", "every 5 sec", "union", ("A", "B"))]
    with pytest.raises(AnnotationError) as info:
        infer_and_check_annotations(bad)
    assert info.value.cls == "C" and info.value.expected == "every 15 sec"
    inferred = infer_and_check_annotations(bad[:2] + [_cls("C", None, "union", ("A", "B"))])
    assert inferred["C"].period == 15
    assert infer_and_check_annotations([_cls("S")])["S"].period is None


def test_inference_is_idempotent():
    prog = parse_program(src("traffic.sig"))
    assert infer_and_check_annotations(prog.classes) == infer_and_check_annotations(prog.classes)


def test_cyclic_wiring():
    with pytest.raises(CyclicWiring):
        infer_and_check_annotations([_cls("A", ups=("B",)), _cls("B", ups=("A",))])


def test_anytime_is_neutral_for_intersection():
    classes = [_cls("A", "every 10 sec"), _cls("B", "anytime"),
               _cls("C", None, "intersection", ("A", "B"))]
    assert infer_and_check_annotations(classes)["C"].period == 10


# ---------------------------------------------------------------- lowering

def test_five_node_program_lowers_to_fixture():
    lp = lower(src("b1_five_node.sig"))
    mu, nu = five_node()
    assert lp.nu == nu
    assert dump_rows(lp.mu) == dump_rows(mu)
    assert {l: (e.tm, e.mode) for l, e in lp.mu.items()} == {l: (e.tm, e.mode) for l, e in mu.items()}
    assert dump_history(lp.phi) == dump_history(lp.phi.__class__({0: nu}))
    assert wellformed_env(lp.mu, lp.nu)


def test_class_from_calculus_section():
    prog = """
    @timing("every 30 sec") signal class P { persistent signal p1 = v; }
    signal class C {
      P l;
      signal p = l.p1;
      m() { p; }
    }
    network { let x = new P("l1"); }
    main { new C("l0", x); }
    """
    lp = lower(prog, 1)
    assert (lp.mu["l0"].tm, lp.mu["l0"].mode) == (30, Mode.UNION)
    lit = lp.expr
    assert isinstance(lit, ObjectLiteral) and lit.label == "l0"
    assert lit.upstreams == (("l", Id("l1")),)
    assert [m.name for m in lit.methods] == ["m"]


def test_source_without_rhs_reads_feed():
    lp = lower(src("monitor.sig"), 5)
    assert lp.nu["FW"].effects == (Feed("FW", "notification", "none"),)


@pytest.mark.parametrize("main,err", [
    ('new A("l1");', DuplicateId),
    ('new Z("q");', UnknownClass),
    ('new C("q", new A("r"));', ArityMismatch),
])
def test_lowering_errors(main, err):
    text = src("b1_five_node.sig") + f"\nmain {{ {main} }}\n"
    with pytest.raises(err):
        lower(text)


def test_unknown_member():
    bad = src("b1_five_node.sig").replace("m(a.a, b.b)", "m(a.zz, b.b)")
    with pytest.raises(UnknownColumn):
        lower(bad)


def test_lowering_preserves_wiring():
    ticks = {"traffic.sig": 5, "waterlevel.sig": 60}
    for name in ("traffic.sig", "treadmill.sig", "waterlevel.sig", "b1_five_node.sig"):
        prog = parse_program(src(name))
        lp = lower(prog, ticks.get(name, 1))
        bound = {let.var: let.value for let in prog.network}

        def node(a):
            return bound.get(a.name) if isinstance(a, Name) else a

        edges = set()
        stack = [let.value for let in prog.network]
        while stack:
            n = stack.pop()
            kids = [node(a) for a in n.args if hasattr(node(a), "cls")]
            assert lp.nu[n.id].inputs == tuple(k.id for k in kids)
            edges |= {(k.id, n.id) for k in kids}
            stack.extend(kids)
        assert edges == {(i, l) for l, p in lp.nu.items() for i in p.inputs}


def test_syntax_error_offset():
    with pytest.raises(DSLSyntaxError) as info:
        parse_program("signal class A { persistent signal ; }")
    assert info.value.offset == 35


# -------------------------------------------------------------- round trip

idents = st.sampled_from(["a", "b", "total", "reply", "x1"])
atoms = st.one_of(idents.map(Name), st.sampled_from(["0", "12", "3.5"]).map(Num),
                  st.sampled_from(["", "hi", 'q"x']).map(Str))
surface = st.recursive(atoms, lambda c: st.one_of(
    st.builds(Member, c, idents),
    st.builds(Call, st.none() | c, idents, st.lists(c, max_size=3).map(tuple)),
    st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "<", ">", "==", "&&", "||"]), c, c),
), max_leaves=12)


@given(surface)
def test_expression_round_trip(e):
    assert parse_expr(unparse_expr(e)) == e


classes = st.builds(
    lambda name, sigs, ups, meths, ann: SignalClassDecl(
        name, ann[0], ann[1], ann[2],
        tuple(SignalDecl(f"v{i}", p, t, b, init) for i, (p, t, b, init) in enumerate(sigs)),
        tuple(UpstreamField(f"u{i}", c) for i, c in enumerate(ups)),
        tuple(MethodDecl(f"m{i}", b) for i, b in enumerate(meths))),
    st.sampled_from(["A", "Bee", "C2"]),
    st.lists(st.one_of(
        st.tuples(st.just(True), st.none() | st.just("int"), st.none(), st.none() | st.just("0")),
        st.tuples(st.just(True), st.none(), surface, st.none()),
        st.tuples(st.just(False), st.none() | st.just("double"), surface, st.none())), max_size=3),
    st.lists(st.sampled_from(["A", "Bee"]), max_size=2),
    st.lists(surface, max_size=2),
    st.tuples(st.none() | st.sampled_from(["union", "intersection"]),
              st.none() | st.sampled_from([Every(5, "sec", "00:00:00"), ANYTIME]),
              st.none() | st.integers(1, 900)),
)


@settings(max_examples=60)
@given(st.lists(classes, max_size=3))
def test_program_round_trip(cs):
    from zetadps.dsl.parser import Program
    p = Program(tuple(cs))
    assert parse_program(unparse_program(p)) == p


@pytest.mark.parametrize("name", ["b1_five_node.sig", "b2_switch.sig", "monitor.sig",
                                  "traffic.sig", "treadmill.sig", "waterlevel.sig"])
def test_shipped_programs_round_trip(name):
    p = parse_program(src(name))
    assert parse_program(unparse_program(p)) == p
