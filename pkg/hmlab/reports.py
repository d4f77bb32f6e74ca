from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .fields import GridDomain, ScalarSampleField, point_to_dict
from .utils import dump_json

LOGGER = logging.getLogger("HermitianLab.Reports")

PRNG_NAME = "PCG64"
STATUSES = ("pass", "fail", "inconclusive", "not-applicable")


@dataclass
class Witness:
    s: Optional[complex] = None
    v: Optional[np.ndarray] = None
    note: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "s": point_to_dict(self.s) if self.s is not None else None,
            "v": [point_to_dict(complex(x)) for x in np.asarray(self.v).reshape(-1)] if self.v is not None else None,
            "note": self.note,
        }


@dataclass
class VerificationReport:
    """Outcome of one check; ``passed`` always equals ``residual <= tolerance``."""

    check: str
    residual: float
    tolerance: float
    samples: int = 0
    witness: Witness = field(default_factory=Witness)
    seed: Optional[int] = None
    vacuous: int = 0
    status: str = ""
    details: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)
        if not self.status:
            self.status = "pass" if self.passed else "fail"
        if self.status not in STATUSES:
            raise ValueError(f"Unknown report status '{self.status}'")

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    @classmethod
    def not_applicable(cls, check: str, reason: str, seed: Optional[int] = None, **details) -> "VerificationReport":
        return cls(
            check=check,
            residual=0.0,
            tolerance=0.0,
            witness=Witness(note=reason),
            seed=seed,
            status="not-applicable",
            details=dict(details),
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "check": self.check,
            "pass": self.passed,
            "status": self.status,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "samples": int(self.samples),
            "vacuous": int(self.vacuous),
            "witness": self.witness.to_dict(),
            "seed": self.seed,
            "prng": PRNG_NAME,
            "details": self.details,
        }


@dataclass
class PshReport:
    verdict: str
    worst_node: Optional[complex]
    worst_lambda: float
    radii: List[float]
    tolerance: float
    nodes_tested: int = 0
    lambda_map: Optional[np.ndarray] = field(default=None, repr=False)
    circle_nodes: int = 64

    @property
    def margin(self) -> float:
        return self.worst_lambda + self.tolerance

    def to_dict(self) -> Dict[str, object]:
        return {
            "verdict": self.verdict,
            "worst_node": point_to_dict(self.worst_node) if self.worst_node is not None else None,
            "worst_lambda": self.worst_lambda,
            "radii": list(self.radii),
            "tolerance": self.tolerance,
            "nodes_tested": self.nodes_tested,
            "circle_nodes": self.circle_nodes,
        }

    def to_report(self, check: str = "psh", seed: Optional[int] = None) -> VerificationReport:
        residual = max(0.0, -self.worst_lambda) if np.isfinite(self.worst_lambda) else float("inf")
        status = {"psh": "pass", "not-psh": "fail", "inconclusive": "inconclusive"}[self.verdict]
        return VerificationReport(
            check=check,
            residual=residual,
            tolerance=self.tolerance,
            samples=self.nodes_tested,
            witness=Witness(s=self.worst_node, note=f"psh verdict: {self.verdict}"),
            seed=seed,
            status=status,
            details={"psh": self.to_dict()},
        )


def write_report(report: VerificationReport, path: Path) -> Path:
    dump_json(report.to_dict(), path)
    LOGGER.info("Wrote %s report -> %s", report.check, path.name)
    return path


def write_scalar_csv(samples: ScalarSampleField, path: Path, value_name: str = "value") -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(["re", "im", value_name])
        for re, im, value in samples.rows():
            writer.writerow([repr(re), repr(im), repr(value)])
    return path


def curvature_header(rank: int) -> List[str]:
    header = ["re", "im"]
    for row in range(rank):
        for col in range(rank):
            header.extend([f"R{row}{col}_re", f"R{row}{col}_im"])
    return header


def write_matrix_csv(domain: GridDomain, matrices: np.ndarray, path: Path, header: Sequence[str]) -> Path:
    """One row per node (row-major), matrix entries row-major with re/im interleaved."""
    path.parent.mkdir(parents=True, exist_ok=True)
    points = domain.points().reshape(-1)
    flat = matrices.reshape(points.size, -1)
    with path.open("w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(list(header))
        for z, entries in zip(points, flat):
            row = [repr(float(z.real)), repr(float(z.imag))]
            for value in entries:
                row.extend([repr(float(value.real)), repr(float(value.imag))])
            writer.writerow(row)
    return path
