"""Command-line driver.

Exit codes: 0 success, 1 property violated, 2 input error, 3 engine error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .engine import render_trace
from .env import dump_history
from .errors import ScenarioError, ZetaError
from .oracles import replay, run_thm31, run_thm32
from .scenario import Scenario, check_history, load_program, load_scenario, render_check, simulate
from .store import dump_rows
from .terms import show

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_ENGINE = 0, 1, 2, 3


class _InputError(Exception):
    pass


def _tick_ids(text):
    t, sep, ids = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected 't:id,id', got {text!r}")
    try:
        tick = int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tick in {text!r}") from None
    return tick, frozenset(x.strip() for x in ids.split(",") if x.strip())


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _merge(pairs):
    out = {}
    for t, ids in pairs or ():
        out[t] = out.get(t, frozenset()) | ids
    return out


def _write(path, text, out):
    if path is None:
        return
    if path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load(args):
    """Scenario from a .scn file, or an ad hoc one around a program file."""
    try:
        path = Path(args.input)
        if path.suffix == ".scn":
            sc = load_scenario(path)
            if args.ticks is not None:
                sc.ticks = args.ticks
            if args.tick_seconds is not None:
                sc.tick_seconds = args.tick_seconds
        else:
            sc = Scenario(path, ticks=args.ticks if args.ticks is not None else 1,
                          tick_seconds=args.tick_seconds or 1)
        lp = load_program(sc.program, sc.tick_seconds)
    except (ZetaError, SyntaxError) as exc:
        raise _InputError(str(exc)) from None
    return sc, lp


def _simulate(args, sc, lp):
    try:
        return simulate(sc, lp, recover_at=tuple(args.recover_at or ()),
                        extra_loss=_merge(args.loss), extra_faults=_merge(args.fault),
                        topology=args.topology)
    except ScenarioError as exc:
        raise _InputError(str(exc)) from None


def cmd_parse(args, out):
    try:
        lp = load_program(args.input, args.tick_seconds or 1)
    except (ZetaError, SyntaxError) as exc:
        raise _InputError(str(exc)) from None
    for l in sorted(lp.mu):
        e = lp.mu[l]
        out.write(f"ENTRY\t{l}\t{lp.instance_class[l]}\ttm={e.tm}\tmode={e.mode.short}\n")
    out.write(dump_rows(lp.mu))
    out.write(dump_history(lp.phi))
    out.write(f"EXPR\t{show(lp.expr)}\n")
    return EXIT_OK


def cmd_run(args, out):
    sc, lp = _load(args)
    res = _simulate(args, sc, lp)
    trace = render_trace(res.trace)
    if args.trace:
        _write(args.trace, trace, out)
    else:
        out.write(trace)
    _write(args.dump_store, dump_rows(res.state.mu), out)
    _write(args.dump_history, dump_history(res.state.phi), out)
    return EXIT_OK


def cmd_check(args, out):
    sc, lp = _load(args)
    res = _simulate(args, sc, lp)
    _write(args.trace, render_trace(res.trace), out)
    _write(args.dump_store, dump_rows(res.state.mu), out)
    _write(args.dump_history, dump_history(res.state.phi), out)
    reports = check_history(res.state)
    out.write(render_check(reports))
    return EXIT_OK if all(r.consistent for r in reports) else EXIT_VIOLATED


def cmd_recover(args, out):
    sc, lp = _load(args)
    if not (args.recover_at or sc.recover_at or sc.auto_checkpoint):
        raise _InputError("recover needs --recover-at T or checkpoints in the scenario")
    res = _simulate(args, sc, lp)
    _write(args.trace, render_trace(res.trace), out)
    for rep in res.checkpoints:
        out.write(f"CHECKPOINT\t{rep.checkpoint_t}\n")
        out.write(rep.render(res.state.mu))
    _write(args.dump_store, dump_rows(res.state.mu), out)
    _write(args.dump_history, dump_history(res.state.phi), out)
    return EXIT_OK


def cmd_oracle(args, out):
    if args.replay is not None:
        msg = replay(args.kind, args.replay, args.topology)
        out.write(f"{args.kind} case {args.replay}: {msg or 'ok'}\n")
        return EXIT_OK if msg in (None, "vacuous") else EXIT_VIOLATED
    runner = run_thm31 if args.kind == "thm31" else run_thm32
    start = time.perf_counter()
    res = runner(args.cases, args.seed, topology=args.topology)
    elapsed = time.perf_counter() - start
    out.write(res.summary() + f" in {elapsed:.2f}s\n")
    for f in res.failures:
        out.write(f"FAIL\t{f}\n")
    if res.failures:
        first = res.failures[0].split()[2].rstrip(":")
        out.write(f"replay with: python -m zetadps oracle {args.kind} --replay {first}\n")
    return EXIT_OK if res.ok else EXIT_VIOLATED


def build_parser():
    p = argparse.ArgumentParser(prog="zetadps", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input", help="scenario (.scn) or program (.sig) file")
        sp.add_argument("--ticks", type=int)
        sp.add_argument("--tick-seconds", type=_positive)
        sp.add_argument("--loss", type=_tick_ids, action="append", metavar="T:IDS")
        sp.add_argument("--fault", type=_tick_ids, action="append", metavar="T:IDS")
        sp.add_argument("--recover-at", type=int, action="append", metavar="T")
        sp.add_argument("--trace", metavar="FILE")
        sp.add_argument("--dump-store", metavar="FILE")
        sp.add_argument("--dump-history", metavar="FILE")
        sp.add_argument("--topology", choices=("post", "pre"), default="post")

    sp = sub.add_parser("parse", help="parse and lower a program")
    sp.add_argument("input")
    sp.add_argument("--tick-seconds", type=_positive)
    sp.set_defaults(func=cmd_parse)
    for name, fn in (("run", cmd_run), ("check", cmd_check), ("recover", cmd_recover)):
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(func=fn)
    sp = sub.add_parser("oracle", help="run a theorem property suite")
    sp.add_argument("kind", choices=("thm31", "thm32"))
    sp.add_argument("--cases", type=_positive, default=500)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--replay", type=int, metavar="CASE_SEED")
    sp.add_argument("--topology", choices=("post", "pre"), default="post")
    sp.set_defaults(func=cmd_oracle)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args, out)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ZetaError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
