#!/usr/bin/env python3
"""End-to-end offline run against the mock provider.

Generates completions, parses them into datasets, holds out a synthetic test
pool, splits, trains the baseline, and writes the evaluation matrix. No
network access is required.
"""

import argparse
import sys

from sidgen.cli import run_offline_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--requests", type=int, default=4)
    args = ap.parse_args()
    csv_path = run_offline_demo(
        args.out, seed=args.seed, epochs=args.epochs, requests=args.requests
    )
    print(f"evaluation matrix: {csv_path}")
    print(csv_path.with_suffix(".txt").read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
