"""Time one checkpoint-with-recovery on each desk-scale scenario.

Each scenario is stretched until the store holds at least ``--rows`` rows;
the checkpoint covers the whole run. Also reports whether the repaired
store equals the loss-free run and how many rows a checkpoint over the
loss-free run rewrites (should be zero).
"""
import argparse
import sys
from pathlib import Path

from zetadps.bench import bench_scenario

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=10_000)
    ap.add_argument("names", nargs="*", default=["treadmill", "traffic", "waterlevel"])
    args = ap.parse_args()
    ok = True
    for name in args.names:
        res = bench_scenario(ROOT / "scenarios" / f"{name}.scn", args.rows)
        print(res.line())
        ok &= res.matches_baseline and res.idle_repairs == 0 and res.seconds < 1.0
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
