import pytest
from hypothesis import given
from hypothesis import strategies as st

from zetadps.env import (ResolverEntry, SwitchHistory, check_acyclic, downstream_closure,
                         dump_history, env_update, history_at, history_record, upstream_closure)
from zetadps.errors import NoSnapshot
from zetadps.fixtures import five_node
from zetadps.store import Relation
from zetadps.terms import Guarded, Id, Join, Mode, Source


def test_env_update_examples():
    assert env_update({"l1": "a"}, "l1", "b") == {"l1": "b"}
    assert env_update({"l1": "a"}, "l2", "b") == {"l1": "a", "l2": "b"}
    _, nu = five_node()
    src = Source("l6", ("d",), (Id("ld2"),))
    nu2 = env_update(nu, "l6", src)
    assert nu2["l6"] == src and "l6" not in nu


def test_history_record_and_lookup():
    _, nu0 = five_node()
    nu5 = env_update(nu0, "l6", Source("l6"))
    phi = history_record(SwitchHistory(), 0, nu0)
    assert phi.items() == [(0, nu0)]
    phi = history_record(phi, 5, nu5)
    assert history_at(phi, 3) == nu0
    assert history_at(phi, 5) == nu5
    with pytest.raises(NoSnapshot):
        history_at(SwitchHistory({5: nu5}), 2)
    same_tick = history_record(history_record(SwitchHistory(), 4, nu0), 4, nu5)
    assert same_tick.items() == [(4, nu5)]


@given(st.integers(0, 20), st.integers(0, 40))
def test_history_lookup_is_latest_at_or_before(t, probe):
    phi = history_record(history_record(SwitchHistory(), 0, {"a": 0}), t + 1, {"b": 1})
    expect = {"b": 1} if probe >= t + 1 else {"a": 0}
    assert history_at(phi, probe) == expect


def test_acyclicity():
    _, nu = five_node()
    assert check_acyclic(nu)
    cyc = {"l1": Guarded(Join(Mode.UNION, ("l2",)), "l1"),
           "l2": Guarded(Join(Mode.UNION, ("l1",)), "l2")}
    assert not check_acyclic(cyc)
    assert check_acyclic({"s": Source("s")})


@given(st.permutations(["a", "b", "c", "d"]))
def test_acyclicity_invariant_under_relabeling(perm):
    names = dict(zip(["a", "b", "c", "d"], perm))
    base = {"a": Source("a"), "b": Guarded(Join(Mode.UNION, ("a",)), "b"),
            "c": Guarded(Join(Mode.UNION, ("b", "a")), "c"),
            "d": Guarded(Join(Mode.UNION, ("c",)), "d")}
    relabeled = {names[k]: Guarded(Join(Mode.UNION, tuple(names[i] for i in p.inputs)), names[k])
                 if p.inputs else Source(names[k]) for k, p in base.items()}
    assert check_acyclic(relabeled)
    relabeled[names["a"]] = Guarded(Join(Mode.UNION, (names["d"],)), names["a"])
    assert not check_acyclic(relabeled)


def test_closures_and_dump():
    _, nu = five_node()
    assert downstream_closure(nu, ["l1"]) == {"l3", "l5"}
    assert upstream_closure(nu, ["l5"]) == {"l1", "l2", "l3", "l4", "l5"}
    assert dump_history(SwitchHistory({0: nu})) == (
        "0\tl1:S:\tl2:S:\tl3:U:l1,l2\tl4:S:\tl5:I:l3,l4\n")


def test_resolver_entry_needs_positive_tm():
    with pytest.raises(ValueError):
        ResolverEntry(Relation(("p",)), 0, Mode.UNION)
