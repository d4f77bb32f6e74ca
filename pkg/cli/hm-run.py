#!/usr/bin/env python3
from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from hmlab import LabError, run_scenario
from hmlab.engine import EXIT_CONFIG
from hmlab.utils import resolve_output_dir


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Run the check pipeline of a scenario")
    parser.add_argument("scenario", help="Path to the scenario JSON")
    parser.add_argument("--out", default=None, help="Report directory (defaults to HM_OUTPUT_DIR)")
    parser.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    scenario_path = Path(args.scenario).expanduser().resolve()
    if not scenario_path.exists():
        print(f"Scenario file not found: {scenario_path}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)

    try:
        status, reports = run_scenario(scenario_path, out=args.out, seed=args.seed)
    except LabError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)

    for report in reports:
        print(f"{report.check:<16} {report.status}")
    print(resolve_output_dir(args.out))
    raise SystemExit(status)


if __name__ == "__main__":
    main()
