#!/usr/bin/env python3
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from hmlab import GridDomain, LabError, MatrixPolyField, load_scenario, validate_metric
from hmlab.engine import EXIT_CONFIG, EXIT_FAIL, build_inputs
from hmlab.errors import NotHermitianError, NotPositiveError


def _validate_field(path: Path, args: argparse.Namespace) -> dict:
    payload = json.loads(path.read_text(encoding="utf-8"))
    domain = GridDomain.square(complex(args.center_re, args.center_im), args.half_width, args.resolution)
    metric = validate_metric(MatrixPolyField.from_dict(payload), domain)
    return {"kind": "metric", "rank": metric.rank, "spd_margin": metric.spd_margin, "domain": domain.to_dict()}


def _validate_scenario(path: Path) -> dict:
    scenario = load_scenario(path)
    inputs = build_inputs(scenario)
    return {
        "kind": "scenario",
        "name": scenario.name,
        "checks": scenario.checks,
        "metrics": {role: {"rank": m.rank, "spd_margin": m.spd_margin} for role, m in inputs.metrics()},
    }


def main() -> None:
    parser = argparse.ArgumentParser(description="Validate a scenario file or a single metric field")
    parser.add_argument("file", help="Scenario JSON, or field JSON with --field")
    parser.add_argument("--field", action="store_true", help="Treat the file as a bare metric field")
    parser.add_argument("--half-width", type=float, default=0.5, help="Domain half-width for --field")
    parser.add_argument("--resolution", type=int, default=65, help="Grid resolution for --field")
    parser.add_argument("--center-re", type=float, default=0.0, help="Domain center (real part) for --field")
    parser.add_argument("--center-im", type=float, default=0.0, help="Domain center (imaginary part) for --field")
    args = parser.parse_args()

    path = Path(args.file).expanduser().resolve()
    if not path.exists():
        print(f"File not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)

    try:
        summary = _validate_field(path, args) if args.field else _validate_scenario(path)
    except (NotHermitianError, NotPositiveError) as exc:
        print(f"Invalid metric: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_FAIL)
    except (LabError, json.JSONDecodeError) as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    print(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
