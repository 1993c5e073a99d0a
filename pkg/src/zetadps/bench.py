"""Desk-scale recovery benchmark over the shipped scenario analogs."""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from pathlib import Path

from .consistency import equiv_records_upto
from .recovery import CheckpointState, run_checkpoint
from .scenario import load_program, load_scenario, simulate


@dataclass
class BenchResult:
    name: str
    ticks: int
    rows: int
    repaired: int
    seconds: float
    matches_baseline: bool
    idle_repairs: int

    def line(self):
        return (f"{self.name}\tticks={self.ticks}\trows={self.rows}\trepaired={self.repaired}"
                f"\tcheckpoint={self.seconds * 1000:.1f}ms\tbaseline={self.matches_baseline}"
                f"\tidle_repairs={self.idle_repairs}")


def _rows(mu):
    return sum(len(e.relation.times()) for e in mu.values())


def bench_scenario(path, min_rows=10_000):
    """Run the scenario with its losses and no checkpoints, long enough to
    hold ``min_rows`` rows, then time one checkpoint over the whole window."""
    sc = load_scenario(path)
    lp = load_program(sc.program, sc.tick_seconds)
    sc = dataclasses.replace(sc, auto_checkpoint=False, recover_at=(), faults={})
    probe = simulate(dataclasses.replace(sc, ticks=100), lp)
    per_tick = max(_rows(probe.state.mu) / 100, 1e-9)
    ticks = max(sc.ticks, int(min_rows / per_tick * 1.05) + 1)
    sc = dataclasses.replace(sc, ticks=ticks)
    lossy = simulate(sc, lp).state
    clean = simulate(dataclasses.replace(sc, loss={}), lp).state
    end = ticks
    start = time.perf_counter()
    mu, _, rep = run_checkpoint(lossy, CheckpointState.initial(lossy.mu), end, inplace=True)
    elapsed = time.perf_counter() - start
    _, _, idle = run_checkpoint(clean, CheckpointState.initial(clean.mu), end)
    return BenchResult(Path(path).stem, ticks, _rows(mu), len(rep.repaired), elapsed,
                       equiv_records_upto(mu, clean.mu, end), len(idle.repaired))
