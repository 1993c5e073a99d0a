"""Run both theorem property suites and print their summaries.

    python3 scripts/run_oracles.py --cases 500 --seed 42 [--topology pre]
"""
import argparse
import sys
import time

from zetadps.oracles import run_thm31, run_thm32


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=500)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--topology", choices=("post", "pre"), default="post")
    args = ap.parse_args()
    ok = True
    for runner in (run_thm31, run_thm32):
        start = time.perf_counter()
        res = runner(args.cases, args.seed, topology=args.topology)
        print(f"{res.summary()} in {time.perf_counter() - start:.2f}s")
        for f in res.failures[:5]:
            print(f"  {f}")
        ok &= res.ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
