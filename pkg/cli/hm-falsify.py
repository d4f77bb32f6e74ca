#!/usr/bin/env python3
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from hmlab import LabError, falsify
from hmlab.engine import EXIT_CONFIG, EXIT_FAIL


def main() -> None:
    parser = argparse.ArgumentParser(description="Randomized search for counterexamples to the psh conclusion")
    parser.add_argument("--trials", type=int, default=100, help="Number of random scenarios")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the PCG64 generator")
    parser.add_argument("--resolution", type=int, default=65, help="Grid resolution")
    parser.add_argument("--iterations", type=int, default=60, help="Gradient-ascent iterations per hypothesis check")
    parser.add_argument("--out", default=None, help="Directory for falsify_summary.json")
    args = parser.parse_args()

    try:
        summary = falsify(args.trials, seed=args.seed, resolution=args.resolution, out=args.out, iterations=args.iterations)
    except LabError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)

    brief = {key: value for key, value in summary.items() if key != "counterexamples"}
    brief["counterexamples"] = len(summary["counterexamples"])
    print(json.dumps(brief, indent=2, sort_keys=True))
    if summary["counterexamples"]:
        raise SystemExit(EXIT_FAIL)


if __name__ == "__main__":
    main()
