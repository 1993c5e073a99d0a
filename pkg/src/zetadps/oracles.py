"""Executable forms of the two time-consistency theorems, as seeded fuzz suites."""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import List

from .consistency import consistent_env, wellformed_env
from .engine import step
from .gen import GenConfig, generate, random_deliver
from .recovery import theorem2_conclusions


@dataclass
class OracleResult:
    kind: str
    cases: int
    passed: int = 0
    vacuous: int = 0
    failures: List[str] = field(default_factory=list)
    drivers: Counter = field(default_factory=Counter)

    @property
    def ok(self):
        return not self.failures

    def summary(self):
        kinds = ",".join(f"{k}={v}" for k, v in sorted(self.drivers.items()))
        return (f"{self.kind}: {self.passed}/{self.cases} passed, {self.vacuous} vacuous, "
                f"{len(self.failures)} failed [{kinds}]")


def case_seeds(seed, cases):
    rng = random.Random(seed)
    return [rng.getrandbits(48) for _ in range(cases)]


def check_thm31(state, topology="post"):
    """None if the step is consistent at its tick, "vacuous" when the full
    propagation is not derivable, otherwise a description of the violation."""
    if not wellformed_env(state.mu, state.nu):
        return "generated state is not well formed"
    rep = step(state, None, topology=topology)
    if not rep.outcome.complete:
        return "vacuous"
    after = rep.state_after
    report = consistent_env(after.mu, after.phi.at(state.t), state.t)
    if report.consistent:
        return None
    return report.render().strip()


def check_thm32(state, deliver, topology="post"):
    res = theorem2_conclusions(state, deliver, topology=topology)
    bad = sorted(k for k, v in res.items() if not v)
    return None if not bad else "conclusions failed: " + ",".join(bad)


def run_thm31(cases, seed, cfg=None, topology="post"):
    cfg = cfg or GenConfig(stale_rows=True)
    out = OracleResult("thm31", cases)
    for s in case_seeds(seed, cases):
        case = generate(s, cfg)
        out.drivers[case.driver_kind] += 1
        msg = check_thm31(case.state, topology)
        if msg is None:
            out.passed += 1
        elif msg == "vacuous":
            out.vacuous += 1
        else:
            out.failures.append(f"case seed {s}: {msg}")
    return out


def run_thm32(cases, seed, cfg=None, topology="post"):
    cfg = cfg or GenConfig()
    out = OracleResult("thm32", cases)
    for s in case_seeds(seed, cases):
        case = generate(s, cfg)
        out.drivers[case.driver_kind] += 1
        deliver = random_deliver(random.Random(s ^ 0x5EED), case.state)
        msg = check_thm32(case.state, deliver, topology)
        if msg is None:
            out.passed += 1
        else:
            out.failures.append(f"case seed {s}: {msg}")
    return out


def replay(kind, case_seed, topology="post"):
    """Re-run a single failing case by its case seed."""
    if kind == "thm31":
        return check_thm31(generate(case_seed, GenConfig(stale_rows=True)).state, topology)
    state = generate(case_seed).state
    deliver = random_deliver(random.Random(case_seed ^ 0x5EED), state)
    return check_thm32(state, deliver, topology)
