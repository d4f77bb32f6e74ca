#!/usr/bin/env python3
from __future__ import annotations

import argparse
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from hmlab import LabError, load_scenario, write_map
from hmlab.engine import EXIT_CONFIG
from hmlab.scenario import MAPS
from hmlab.utils import resolve_output_dir


def main() -> None:
    parser = argparse.ArgumentParser(description="Export a heatmap CSV for a scenario")
    parser.add_argument("kind", choices=MAPS, help="Map to export")
    parser.add_argument("scenario", help="Path to the scenario JSON")
    parser.add_argument("--out", default=None, help="Output directory (defaults to HM_OUTPUT_DIR)")
    args = parser.parse_args()

    scenario_path = Path(args.scenario).expanduser().resolve()
    if not scenario_path.exists():
        print(f"Scenario file not found: {scenario_path}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)

    try:
        scenario = load_scenario(scenario_path)
        paths = write_map(args.kind, scenario, resolve_output_dir(args.out) / scenario.name)
    except LabError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    for path in paths:
        print(path)


if __name__ == "__main__":
    main()
