"""Regenerate the golden traces under tests/golden/.

Only rerun this after checking the new output by hand; the tests compare
against these files byte for byte.
"""
import argparse
from pathlib import Path

from zetadps.goldens import GOLDENS

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="diff instead of writing")
    args = ap.parse_args()
    status = 0
    for name, build in GOLDENS.items():
        path = ROOT / "tests" / "golden" / name
        text = build(ROOT)
        if args.check:
            same = path.exists() and path.read_text(encoding="utf-8") == text
            print(f"{'ok' if same else 'DIFFERS'}\t{name}")
            status |= not same
        else:
            path.write_text(text, encoding="utf-8")
            print(f"wrote {path.relative_to(ROOT)}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
