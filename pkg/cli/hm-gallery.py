#!/usr/bin/env python3
from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from hmlab import LabError, run_scenario, save_scenario
from hmlab.engine import EXIT_CONFIG
from hmlab.gallery import GALLERY, gallery


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="List, run or export the prebuilt scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="List gallery entries")
    run = sub.add_parser("run", help="Run a gallery entry")
    run.add_argument("name")
    run.add_argument("--out", default=None, help="Report directory (defaults to HM_OUTPUT_DIR)")
    run.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    export = sub.add_parser("export", help="Write a gallery entry as a scenario JSON")
    export.add_argument("name")
    export.add_argument("file")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    if args.command == "list":
        for name, entry in GALLERY.items():
            print(f"{name:<22} {entry.description}")
        return

    try:
        scenario = gallery(args.name)
        if args.command == "export":
            target = Path(args.file).expanduser().resolve()
            save_scenario(scenario, target)
            print(target)
            return
        status, reports = run_scenario(scenario, out=args.out, seed=args.seed)
    except LabError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)

    for report in reports:
        expected = scenario.expected.get(report.check)
        marker = "" if expected in (None, report.status) else f"  (expected {expected})"
        print(f"{report.check:<16} {report.status}{marker}")
    raise SystemExit(status)


if __name__ == "__main__":
    main()
