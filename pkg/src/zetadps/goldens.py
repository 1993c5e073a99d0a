"""Builders for the committed golden outputs (shared by tests and scripts)."""
from __future__ import annotations

from .engine import render_trace
from .env import dump_history
from .scenario import load_scenario, simulate
from .store import dump_rows


def _bundle(trace, state):
    return ("# trace\n" + render_trace(trace) + "# history\n" + dump_history(state.phi)
            + "# store\n" + dump_rows(state.mu))


def b1_golden(root):
    """One propagation of the five-node network."""
    res = simulate(load_scenario(root / "scenarios" / "b1.scn"))
    return _bundle(res.trace, res.state)


def b2_golden(root):
    """Object creation then upstream switch: two steps, two snapshots."""
    sc = load_scenario(root / "scenarios" / "b2_switch.scn")
    sc.ticks = 2
    res = simulate(sc)
    return _bundle(res.trace, res.state)


GOLDENS = {
    "b1_trace.txt": b1_golden,
    "b2_trace.txt": b2_golden,
}
