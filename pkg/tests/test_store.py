import pytest
from hypothesis import given
from hypothesis import strategies as st

from zetadps.errors import ArityMismatch, UnknownColumn
from zetadps.store import (BOTTOM, Relation, dump_rows, has_record_at, insert, latest_at,
                           prev_tick, timestamps_upto)
from zetadps.env import ResolverEntry
from zetadps.terms import Mode


def rel(rows):
    return Relation(("p",), rows={t: (v,) for t, v in rows.items()})


def test_insert_examples():
    r0 = Relation(("p",))
    r1 = insert(r0, 3, ("la",))
    assert [t for t, _ in r1.rows()] == [BOTTOM, 3]
    assert len(r0) == 1  # functional
    r2 = insert(insert(r0, 3, ("la",)), 3, ("lb",))
    assert r2.times() == [3] and r2.row_at(3) == ("lb",)
    with pytest.raises(ArityMismatch):
        insert(r0, 0, ("a", "b"))
    with pytest.raises(ValueError):
        insert(r0, BOTTOM, ("a",))


def test_latest_at_examples():
    r = rel({3: "la", 5: "lb"})
    assert latest_at(r, "p", 4) == "la"
    assert latest_at(Relation(("p",)), "p", 100) == "l_init"
    assert latest_at(r, "p", 5) == "lb"
    assert latest_at(r, "p", BOTTOM) == "l_init"
    with pytest.raises(UnknownColumn):
        latest_at(r, "q", 5)


def test_has_record_and_timestamps():
    r = rel({3: "a", 5: "b"})
    assert has_record_at(r, 3) and not has_record_at(r, 4)
    assert has_record_at(Relation(("p",)), BOTTOM)
    assert timestamps_upto(r, 5) == [3, 5]
    assert timestamps_upto(r, 4) == [3]
    assert timestamps_upto(Relation(("p",)), 10) == []


def test_prev_tick():
    assert prev_tick(0) is BOTTOM and prev_tick(4) == 3


rows = st.lists(st.tuples(st.integers(0, 40), st.sampled_from(["a", "b", "c"])), max_size=20)


@given(rows, st.integers(0, 45))
def test_latest_matches_brute_force(rs, t):
    r = Relation(("p",))
    seen = {}
    for u, v in rs:
        r = insert(r, u, (v,))
        seen[u] = v
    below = [u for u in seen if u <= t]
    expect = seen[max(below)] if below else "l_init"
    assert latest_at(r, "p", t) == expect


@given(rows, st.randoms())
def test_insert_order_irrelevant_for_distinct_times(rs, rnd):
    last = dict(rs)
    a, b = Relation(("p",)), Relation(("p",))
    items = list(last.items())
    for u, v in items:
        a = insert(a, u, (v,))
    rnd.shuffle(items)
    for u, v in items:
        b = insert(b, u, (v,))
    assert a == b


@given(rows, st.integers(0, 40), st.sampled_from(["x", "y"]))
def test_insert_then_latest(rs, t, v):
    r = Relation(("p",))
    for u, w in rs:
        r = insert(r, u, (w,))
    assert latest_at(insert(r, t, (v,)), "p", t) == v


def test_dump_rows_format():
    mu = {"b": ResolverEntry(rel({2: "x"}), 1, Mode.UNION),
          "a": ResolverEntry(Relation(("p", "q"), ("i", "j")), 1, Mode.UNION)}
    assert dump_rows(mu) == "a\tBOT\tp=i\tq=j\nb\tBOT\tp=l_init\nb\t2\tp=x\n"
