from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .errors import LabError, ScenarioError
from .fields import GridDomain
from .utils import expand_repo_placeholders

CHECKS = (
    "validate",
    "curvature-map",
    "hypothesis",
    "conclusion",
    "max-principle",
    "proof-trace",
    "eq23",
    "axioms",
    "lp-stationarity",
    "hom-family",
    "truncation-study",
)
MAPS = ("curvature", "norm", "levi", "lambda")

REQUIRES: Dict[str, tuple] = {
    "validate": ("source",),
    "curvature-map": ("source",),
    "hypothesis": ("source", "target", "homomorphism"),
    "conclusion": ("source", "target", "homomorphism"),
    "max-principle": ("source", "target", "homomorphism"),
    "proof-trace": ("source", "target", "homomorphism"),
    "eq23": ("source",),
    "axioms": (),
    "lp-stationarity": ("lp",),
    "hom-family": ("source", "target"),
    "truncation-study": ("truncation",),
}


@dataclass
class Tolerances:
    exact: float = 1e-8
    fd: float = 1e-5
    hypothesis: float = 1e-8
    surrogate_degree: int = 10
    surrogate_tolerance: float = 1e-8
    fd_step_factor: float = 1e-4
    grid_factor: float = 10.0
    vector_samples: int = 8
    circle_nodes: int = 64
    hypothesis_mode: str = "auto"

    def to_dict(self) -> Dict[str, object]:
        return {
            "exact": self.exact,
            "fd": self.fd,
            "hypothesis": self.hypothesis,
            "surrogate_degree": self.surrogate_degree,
            "surrogate_tolerance": self.surrogate_tolerance,
            "fd_step_factor": self.fd_step_factor,
            "grid_factor": self.grid_factor,
            "vector_samples": self.vector_samples,
            "circle_nodes": self.circle_nodes,
            "hypothesis_mode": self.hypothesis_mode,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, object]) -> "Tolerances":
        return cls(
            exact=float(payload.get("exact", 1e-8)),
            fd=float(payload.get("fd", 1e-5)),
            hypothesis=float(payload.get("hypothesis", 1e-8)),
            surrogate_degree=int(payload.get("surrogate_degree", 10)),
            surrogate_tolerance=float(payload.get("surrogate_tolerance", 1e-8)),
            fd_step_factor=float(payload.get("fd_step_factor", 1e-4)),
            grid_factor=float(payload.get("grid_factor", 10.0)),
            vector_samples=int(payload.get("vector_samples", 8)),
            circle_nodes=int(payload.get("circle_nodes", 64)),
            hypothesis_mode=str(payload.get("hypothesis_mode", "auto")),
        )


@dataclass
class Scenario:
    """A check pipeline over one source/target/homomorphism configuration.

    Metric and homomorphism entries are field JSON objects, ``{"gallery": name,
    "role": ...}`` references, ``{"file": path}`` includes or ``"identity"``.
    """

    name: str
    domain: GridDomain
    checks: List[str]
    seed: int = 0
    source: Optional[object] = None
    target: Optional[object] = None
    homomorphism: Optional[object] = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    maps: List[str] = field(default_factory=list)
    lp: Optional[Dict[str, object]] = None
    direct_image: Optional[Dict[str, object]] = None
    hom_family: Optional[Dict[str, object]] = None
    truncation: Optional[Dict[str, object]] = None
    expected: Dict[str, str] = field(default_factory=dict)
    base_dir: Optional[Path] = None

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {
            "name": self.name,
            "domain": self.domain.to_dict(),
            "checks": list(self.checks),
            "seed": self.seed,
            "tolerances": self.tolerances.to_dict(),
        }
        for key in ("source", "target", "homomorphism", "lp", "direct_image", "hom_family", "truncation"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        if self.maps:
            data["maps"] = list(self.maps)
        if self.expected:
            data["expected"] = dict(self.expected)
        return data

    @classmethod
    def from_dict(cls, payload: Dict[str, object], base_dir: Optional[Path] = None) -> "Scenario":
        if not isinstance(payload, dict):
            raise ScenarioError("Scenario must be a JSON object")
        try:
            scenario = cls(
                name=str(payload["name"]),
                domain=GridDomain.from_dict(payload.get("domain", {})),
                checks=[str(c) for c in payload.get("checks", [])],
                seed=int(payload.get("seed", 0)),
                source=payload.get("source"),
                target=payload.get("target"),
                homomorphism=payload.get("homomorphism"),
                tolerances=Tolerances.from_dict(dict(payload.get("tolerances", {}))),
                maps=[str(m) for m in payload.get("maps", [])],
                lp=payload.get("lp"),
                direct_image=payload.get("direct_image"),
                hom_family=payload.get("hom_family"),
                truncation=payload.get("truncation"),
                expected={str(k): str(v) for k, v in dict(payload.get("expected", {})).items()},
                base_dir=base_dir,
            )
        except KeyError as exc:
            raise ScenarioError(f"Scenario is missing required key {exc}") from exc
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"Scenario has an invalid value: {exc}") from exc
        scenario.validate()
        return scenario

    def provides(self, key: str) -> bool:
        if key == "source":
            return self.source is not None or self.direct_image is not None
        return getattr(self, key) is not None

    def validate(self) -> None:
        if not self.checks:
            raise ScenarioError(f"Scenario '{self.name}' declares no checks")
        for check in self.checks:
            if check not in CHECKS:
                raise ScenarioError(f"Unknown check '{check}'. Known checks: {', '.join(CHECKS)}")
            missing = [key for key in REQUIRES[check] if not self.provides(key)]
            if missing:
                raise ScenarioError(f"Check '{check}' needs {', '.join(missing)}")
        if "axioms" in self.checks and not (self.provides("source") or self.lp is not None):
            raise ScenarioError("Check 'axioms' needs a source metric or an lp block")
        for name in self.maps:
            if name not in MAPS:
                raise ScenarioError(f"Unknown map '{name}'. Known maps: {', '.join(MAPS)}")
        if self.tolerances.hypothesis_mode not in ("auto", "sampled", "optimized"):
            raise ScenarioError(f"Unknown hypothesis mode '{self.tolerances.hypothesis_mode}'")
        if self.tolerances.circle_nodes < 16:
            raise ScenarioError(f"circle_nodes must be at least 16, got {self.tolerances.circle_nodes}")

    def resolve_path(self, value: str) -> Path:
        path = Path(expand_repo_placeholders(value)).expanduser()
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path.resolve()


def save_scenario(scenario: Scenario, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fp:
        json.dump(scenario.to_dict(), fp, indent=2, sort_keys=True)
        fp.write("\n")


def load_scenario(path: Path) -> Scenario:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ScenarioError(f"Scenario file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return Scenario.from_dict(payload, base_dir=path.parent)
    except ScenarioError:
        raise
    except LabError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
