import random

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from zetadps.consistency import consistent_env, equiv_records_upto
from zetadps.engine import MachineState, run
from zetadps.env import SwitchHistory
from zetadps.errors import HypothesisViolation
from zetadps.fixtures import five_node, five_node_state, switch_state
from zetadps.gen import generate, random_deliver
from zetadps.recovery import (CheckpointState, recalc_instance, run_checkpoint,
                              theorem2_conclusions, theorem2_oracle)
from zetadps.store import dump_rows

IDS = ["l1", "l2", "l3", "l4", "l5"]


def lossy(ticks=5, loss=None):
    return run(five_node_state(), ticks, loss or {1: {"l3"}})[0]


def baseline(ticks=5):
    return run(five_node_state(), ticks)[0]


def test_recalc_restores_lost_union_row():
    s = lossy()
    mu, rep = recalc_instance(s.mu, s.phi, "l3", 0, 5)
    assert rep == [("l3", 1, ("m(la,lb)",))]
    assert mu["l3"].relation.row_at(1) == baseline().mu["l3"].relation.row_at(1)
    assert s.mu["l3"].relation.row_at(1) is None


def test_recalc_intersection_skips_unmatched_ticks():
    mu, nu = five_node()
    mu["l4"].relation.put(1, ("ld",))
    mu["l4"].relation.put(2, ("ld",))
    mu["l3"].relation.put(1, ("c",))
    out, rep = recalc_instance(mu, SwitchHistory({0: nu}), "l5", 0, 2)
    assert [t for _, t, _ in rep] == [1]
    assert out["l5"].relation.row_at(2) is None


def test_recalc_empty_window():
    s = lossy()
    mu, rep = recalc_instance(s.mu, s.phi, "l3", 3, 3)
    assert rep == [] and dump_rows(mu) == dump_rows(s.mu)


def test_checkpoint_repairs_to_baseline():
    s = lossy()
    cp = CheckpointState.initial(s.mu)
    mu, cp2, rep = run_checkpoint(s, cp, 5)
    assert [(l, t) for l, t, _ in rep.repaired] == [("l3", 1), ("l5", 1)]
    assert equiv_records_upto(mu, baseline().mu, 5)
    assert all(cp2.last_checkpoint[l] == 5 for l in IDS)
    assert rep.blocked == [] and rep.advanced == IDS
    assert cp.last_checkpoint["l3"] == 0


def test_fault_blocks_downstream():
    s = lossy()
    cp = CheckpointState.initial(s.mu)
    mu, cp2, rep = run_checkpoint(s, cp, 5, fault={"l3"})
    assert rep.blocked == ["l3", "l5"]
    assert rep.advanced == ["l1", "l2", "l4"]
    assert cp2.last_checkpoint["l3"] == cp2.last_checkpoint["l5"] == 0
    assert mu["l3"].relation.row_at(1) is None


def test_later_checkpoint_repairs_after_fault():
    s0 = five_node_state()
    s, _ = run(s0, 5, {1: {"l3"}})
    _, cp, _ = run_checkpoint(s, CheckpointState.initial(s.mu), 5, fault={"l3"}, inplace=True)
    s, _ = run(s, 3, {7: {"l5"}})
    mu, cp, rep = run_checkpoint(s, cp, 8)
    assert equiv_records_upto(mu, baseline(8).mu, 8)
    assert all(cp.last_checkpoint[l] == 8 for l in IDS)
    assert ("l3", 1) in [(l, t) for l, t, _ in rep.repaired]


def test_checkpoint_is_idempotent():
    s = lossy()
    mu, cp, _ = run_checkpoint(s, CheckpointState.initial(s.mu), 5)
    s2 = MachineState(mu, s.nu, s.phi, s.t, s.expr)
    mu2, cp2, rep2 = run_checkpoint(s2, CheckpointState.initial(s.mu), 5)
    assert rep2.repaired == [] and dump_rows(mu2) == dump_rows(mu)
    _, _, rep3 = run_checkpoint(s2, cp, 5)
    assert rep3.repaired == [] and rep3.advanced == IDS


def test_clean_run_needs_no_repair():
    s = baseline()
    _, _, rep = run_checkpoint(s, CheckpointState.initial(s.mu), 5)
    assert rep.repaired == [] and rep.advanced == IDS


def test_checkpoint_ahead_of_clock():
    s = baseline(2)
    with pytest.raises(ValueError):
        run_checkpoint(s, CheckpointState.initial(s.mu), 9)


def test_recovery_follows_the_switch_history():
    s = run(switch_state(), 4, {3: {"l5"}})[0]
    clean = run(switch_state(), 4)[0]
    mu, _, rep = run_checkpoint(s, CheckpointState.initial(s.mu), 4)
    assert [(l, t) for l, t, _ in rep.repaired] == [("l5", 3)]
    assert mu["l5"].relation.row_at(3) == clean.mu["l5"].relation.row_at(3)
    assert mu["l5"].relation.row_at(3) == ("n(m(la,lb),ld2)",)


def test_report_rendering():
    s = lossy()
    mu, _, rep = run_checkpoint(s, CheckpointState.initial(s.mu), 5, fault={"l4"})
    lines = rep.render(mu).splitlines()
    assert lines[0] == "ADVANCED\tl1\t5"
    assert "REPAIRED\tl3\t1\tc=m(la,lb)" in lines
    assert "BLOCKED\tl4" in lines and "BLOCKED\tl5" in lines


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.sets(st.sampled_from(IDS)), st.sets(st.sampled_from(IDS)))
def test_recovery_matches_loss_free_run(t_loss, lost_a, lost_b):
    s = run(five_node_state(), 8, {t_loss: lost_a, 7: lost_b})[0]
    mu, _, _ = run_checkpoint(s, CheckpointState.initial(s.mu), 8)
    assert equiv_records_upto(mu, baseline(8).mu, 8)
    for t in range(1, 9):
        assert consistent_env(mu, s.phi.at(t), t).consistent


def test_theorem2_examples():
    s = five_node_state()
    assert theorem2_oracle(s, frozenset())
    assert theorem2_oracle(s, frozenset(IDS))
    s2 = switch_state()
    assert theorem2_oracle(s2, frozenset({"l1", "l4"}))


def test_theorem2_hypotheses():
    s = five_node_state()
    bad = run(s, 1)[0]
    bad.mu["l1"].relation.put(bad.t, ("late",))
    with pytest.raises(HypothesisViolation):
        theorem2_conclusions(bad, frozenset())
    with pytest.raises(HypothesisViolation):
        theorem2_conclusions(five_node_state(t=0), frozenset())


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**40))
def test_theorem2_on_random_states(seed):
    s = generate(seed).state
    d = random_deliver(random.Random(seed), s)
    assert theorem2_oracle(s, d)


def fresh_run_state(seed):
    """A generated network with its history wiped, started at t=1."""
    s = generate(seed).state
    mu = {l: e.__class__(e.relation.__class__(e.relation.schema, e.relation.initial), e.tm, e.mode)
          for l, e in s.mu.items()}
    return MachineState(mu, s.nu, SwitchHistory({0: s.nu}), 1, s.expr)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**40), st.integers(0, 2**20))
@example(1666137, 2)  # direct read of a node outside the wiring
@example(103 * 7919 + 13, 103)  # feedback loop through a direct read after a switch
def test_recovery_on_random_networks(seed, loss_seed):
    s0 = fresh_run_state(seed)
    clean = run(s0, 24)[0]
    _, _, idle = run_checkpoint(clean, CheckpointState.initial(clean.mu), 24)
    assert idle.repaired == []
    rng = random.Random(loss_seed)
    ids = sorted(s0.mu)
    loss = {t: set(rng.sample(ids, rng.randint(1, len(ids)))) for t in rng.sample(range(1, 25), 3)}
    lossy = run(s0, 24, loss)[0]
    mu, _, _ = run_checkpoint(lossy, CheckpointState.initial(lossy.mu), 24)
    assert equiv_records_upto(mu, clean.mu, 24)
