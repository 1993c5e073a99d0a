"""Scenario files and the simulation loop behind the CLI.

A scenario is an INI-style file::

    [scenario]
    program = ../programs/b1_five_node.sig   ; relative to the scenario file
    ticks = 5
    tick_seconds = 1
    recover_at = 5                           ; optional, comma separated
    auto_checkpoint = false                  ; use @checkpointInterval

    [loss]
    1: l3                                    ; tick: ids that miss the propagation

    [faults]
    5: l3                                    ; checkpoint tick: ids whose recovery fails

    [streams]
    FW@3 = alert                             ; single-signal source
    WebServer.http@5 = 120                   ; explicit signal name

A ``[streams]`` section switches the run to scenario mode: sources with
timing ``anytime`` fire only at ticks that carry a stream value.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Tuple

from .consistency import consistent_env
from .dsl import lower
from .engine import SourceFeeds, step
from .errors import ScenarioError
from .recovery import CheckpointState, run_checkpoint


@dataclass
class Scenario:
    program: Path
    ticks: int = 1
    tick_seconds: int = 1
    seed: int = 0
    loss: Dict[int, FrozenSet[str]] = field(default_factory=dict)
    faults: Dict[int, FrozenSet[str]] = field(default_factory=dict)
    streams: Optional[Dict[Tuple[str, Optional[str], int], str]] = None
    recover_at: Tuple[int, ...] = ()
    auto_checkpoint: bool = False


def _ids(text):
    return frozenset(x.strip() for x in text.split(",") if x.strip())


def _int(text, what):
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(f"{what} must be an integer, not {text!r}") from None


def _tick_map(section, what):
    out = {}
    for key, val in section.items():
        out[_int(key.strip(), f"{what} tick")] = _ids(val)
    return out


def parse_scenario(text, base=Path(".")):
    cp = configparser.ConfigParser(delimiters=("=", ":"), inline_comment_prefixes=(";", "#"),
                                   interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    if not cp.has_section("scenario"):
        raise ScenarioError("scenario file needs a [scenario] section")
    head = cp["scenario"]
    if "program" not in head:
        raise ScenarioError("[scenario] needs a program path")
    sc = Scenario(Path(base) / head["program"].strip())
    sc.ticks = _int(head.get("ticks", "1"), "ticks")
    sc.tick_seconds = _int(head.get("tick_seconds", "1"), "tick_seconds")
    sc.seed = _int(head.get("seed", "0"), "seed")
    sc.recover_at = tuple(_int(x.strip(), "recover_at")
                          for x in head.get("recover_at", "").split(",") if x.strip())
    sc.auto_checkpoint = head.get("auto_checkpoint", "false").strip().lower() in ("1", "true", "yes")
    if sc.ticks < 0 or sc.tick_seconds < 1:
        raise ScenarioError("ticks must be >= 0 and tick_seconds >= 1")
    if cp.has_section("loss"):
        sc.loss = _tick_map(cp["loss"], "loss")
    if cp.has_section("faults"):
        sc.faults = _tick_map(cp["faults"], "fault")
    if cp.has_section("streams"):
        sc.streams = {}
        for key, val in cp["streams"].items():
            if "@" not in key:
                raise ScenarioError(f"stream key {key!r} must look like id@t or id.p@t")
            target, t = key.rsplit("@", 1)
            l, _, p = target.strip().partition(".")
            sc.streams[(l, p or None, _int(t.strip(), "stream tick"))] = val.strip()
    return sc


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text, path.parent)


def load_program(path, tick_seconds):
    try:
        src = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read program {path}: {exc}") from None
    return lower(src, tick_seconds)


def build_feeds(lp, streams):
    if streams is None:
        return None
    out = {}
    for (l, p, t), v in streams.items():
        if l not in lp.mu:
            raise ScenarioError(f"stream for unknown id {l!r}")
        schema = lp.mu[l].relation.schema
        if p is None:
            if len(schema) != 1:
                raise ScenarioError(f"{l} has signals {schema}; name one as {l}.p@{t}")
            p = schema[0]
        elif p not in schema:
            raise ScenarioError(f"{l} has no signal {p!r}")
        out[(l, p, t)] = v
    return SourceFeeds(out, lp.on_demand)


@dataclass
class SimulationResult:
    state: object
    trace: List[object]
    checkpoints: List[object]
    cp: CheckpointState
    program: object


def _check_ids(mu, schedule, what):
    for t, ids in schedule.items():
        unknown = sorted(ids - set(mu))
        if unknown:
            raise ScenarioError(f"{what} at t={t} names unknown ids {unknown}")


def simulate(sc, lp=None, recover_at=(), extra_loss=None, extra_faults=None, topology="post"):
    """Run a scenario; checkpoints happen right after the step at their tick."""
    lp = lp or load_program(sc.program, sc.tick_seconds)
    loss = dict(sc.loss)
    for t, ids in (extra_loss or {}).items():
        loss[t] = loss.get(t, frozenset()) | ids
    faults = dict(sc.faults)
    for t, ids in (extra_faults or {}).items():
        faults[t] = faults.get(t, frozenset()) | ids
    _check_ids(lp.mu, loss, "loss schedule")
    _check_ids(lp.mu, faults, "fault schedule")
    recover = set(sc.recover_at) | set(recover_at)
    state = lp.initial_state(1, build_feeds(lp, sc.streams))
    cp = CheckpointState.initial(lp.mu, 0, lp.checkpoint_intervals)
    trace, reports = [], []
    for _ in range(sc.ticks):
        t = state.t
        deliver = frozenset(state.mu) - loss[t] if t in loss else None
        rep = step(state, deliver, inplace=True, topology=topology)
        state = rep.state_after
        trace.extend(rep.trace)
        targets = None
        due = t in recover
        if not due and sc.auto_checkpoint:
            targets = {l for l, k in lp.checkpoint_intervals.items() if t % k == 0}
            due = bool(targets)
        if due:
            for l in state.mu:
                cp.last_checkpoint.setdefault(l, 0)
            _, cp, report = run_checkpoint(state, cp, t, faults.get(t), targets, inplace=True)
            reports.append(report)
    return SimulationResult(state, trace, reports, cp, lp)


def check_history(state, upto=None):
    """Consistency at every tick of the run, each under the topology of its tick."""
    upto = state.t - 1 if upto is None else upto
    reports = []
    for t in range(1, upto + 1):
        reports.append(consistent_env(state.mu, state.phi.at(t), t))
    return reports


def render_check(reports):
    bad = [r for r in reports if not r.consistent]
    if not bad:
        return "OK\n"
    return "".join(r.render() for r in bad)
