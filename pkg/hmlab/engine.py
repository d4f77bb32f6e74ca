from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from . import __version__
from .bundle import (
    MetricField,
    SectionField,
    connection_form,
    curvature_spectrum_map,
    eq23_residual,
    polarized_identity_residual,
    self_adjoint_residual,
    validate_metric,
)
from .errors import (
    DomainTooSmallError,
    FieldError,
    LabError,
    NotHermitianError,
    NotPositiveError,
    ScenarioError,
    SurrogateError,
    VanishingSectionError,
)
from .fields import GridDomain, MatrixPolyField, default_fd_step, point_from_dict, random_holomorphic_field
from .gallery import gallery, random_metric_field, raise_by_weight, subharmonic_weight, truncation_fields
from .homomorphism import (
    HomomorphismField,
    conclusion_check,
    hypothesis_check,
    log_norm_field,
    operator_norm_field,
    proof_trace,
)
from .psh import grid_tolerance, lambda_map, levi_form_map, max_principle_check, nested_subdomains, psh_verdict
from .reports import (
    PRNG_NAME,
    VerificationReport,
    Witness,
    curvature_header,
    write_matrix_csv,
    write_report,
    write_scalar_csv,
)
from .scenario import Scenario, Tolerances, load_scenario
from .sheaf import (
    bundle_sheaf_metric,
    direct_image_bundle,
    direct_image_sheaf_metric,
    hom_family_griffiths_check,
    hom_sheaf_metric,
    lp_diagonal_metric,
    lp_metric,
    lp_sheaf_metric,
    load_fibered_config,
    metric_axioms_check,
    stationarity_check,
)
from .utils import dump_json, progress_disabled, resolve_output_dir

LOGGER = logging.getLogger("HermitianLab.Engine")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3

FALSIFY_KINDS = ("conformal", "ordered-pair", "random-pair")


@dataclass
class ScenarioInputs:
    """Resolved and validated fields of a scenario."""

    scenario: Scenario
    source: Optional[MetricField] = None
    target: Optional[MetricField] = None
    homomorphism: Optional[HomomorphismField] = None
    lp: Optional[tuple] = None
    direct_image: Optional[object] = None

    @property
    def domain(self) -> GridDomain:
        return self.scenario.domain

    def metrics(self) -> List[Tuple[str, MetricField]]:
        return [(role, m) for role, m in (("source", self.source), ("target", self.target)) if m is not None]

    def require_homomorphism(self, what: str) -> HomomorphismField:
        if self.homomorphism is None:
            raise ScenarioError(f"{what} needs source, target and homomorphism")
        return self.homomorphism


# -- field resolution -----------------------------------------------------


def _resolve_field(scenario: Scenario, value: object, role: str, rank: Optional[int] = None, depth: int = 0) -> MatrixPolyField:
    if depth > 8:
        raise ScenarioError(f"{role}: reference chain is too deep")
    if value == "identity":
        if rank is None:
            raise ScenarioError(f"{role}: cannot infer the rank of 'identity'; use {{\"identity\": n}}")
        return MatrixPolyField.identity(rank)
    if not isinstance(value, dict):
        raise ScenarioError(f"{role}: expected a field object, got {type(value).__name__}")
    if "identity" in value:
        return MatrixPolyField.identity(int(value["identity"]))
    if "gallery" in value:
        entry = gallery(str(value["gallery"]))
        referenced = getattr(entry, str(value.get("role", role)), None)
        if referenced is None:
            raise ScenarioError(f"{role}: gallery entry '{value['gallery']}' has no {value.get('role', role)}")
        return _resolve_field(entry, referenced, role, rank, depth + 1)
    if "file" in value:
        path = scenario.resolve_path(str(value["file"]))
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ScenarioError(f"{role}: field file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{role}: {path} is not valid JSON ({exc})") from exc
        return _resolve_field(scenario, payload, role, rank, depth + 1)
    try:
        return MatrixPolyField.from_dict(value)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{role}: malformed field ({exc})") from exc


def resolve_fields(scenario: Scenario) -> Dict[str, MatrixPolyField]:
    """Resolve source, target and homomorphism, inferring the rank of ``identity`` entries."""
    resolved: Dict[str, MatrixPolyField] = {}
    roles = ("source", "target", "homomorphism")
    for role in roles:
        value = getattr(scenario, role)
        if value is not None and value != "identity":
            resolved[role] = _resolve_field(scenario, value, role)
    for role in roles:
        value = getattr(scenario, role)
        if value is None or role in resolved:
            continue
        rank = None
        if role == "source":
            rank = resolved["homomorphism"].cols if "homomorphism" in resolved else None
            rank = rank or (resolved["target"].rows if "target" in resolved else None)
        elif role == "target":
            rank = resolved["homomorphism"].rows if "homomorphism" in resolved else None
            rank = rank or (resolved["source"].rows if "source" in resolved else None)
        else:
            rank = resolved["source"].rows if "source" in resolved else None
            rank = rank or (resolved["target"].rows if "target" in resolved else None)
        resolved[role] = _resolve_field(scenario, value, role, rank)
    return resolved


def build_inputs(scenario: Scenario) -> ScenarioInputs:
    """Resolve every field of ``scenario`` and validate the metrics on its domain."""
    domain = scenario.domain
    fields = resolve_fields(scenario)
    inputs = ScenarioInputs(scenario)
    if scenario.direct_image is not None:
        fm, _ = load_fibered_config(scenario.direct_image)
        inputs.direct_image = fm
        if "source" not in fields:
            inputs.source = direct_image_bundle(fm, domain)
    if "source" in fields:
        inputs.source = validate_metric(fields["source"], domain)
    if "target" in fields:
        inputs.target = validate_metric(fields["target"], domain)
    if "homomorphism" in fields:
        if inputs.source is None or inputs.target is None:
            raise ScenarioError("A homomorphism needs both a source and a target metric")
        inputs.homomorphism = HomomorphismField(fields["homomorphism"], inputs.source, inputs.target)
    if scenario.lp is not None:
        inputs.lp = load_fibered_config(scenario.lp, domain)
    return inputs


# -- checks ---------------------------------------------------------------


CheckRunner = Callable[[ScenarioInputs, Tolerances, int, Path], List[VerificationReport]]


def _validate(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    details: Dict[str, object] = {}
    worst_defect = 0.0
    witness = Witness(note="all metrics hermitian and positive")
    samples = 0
    for role, M in inputs.metrics():
        values = M.grid_values
        defect = np.abs(values - np.conj(np.swapaxes(values, -1, -2))).max(axis=(-2, -1))
        defect = defect / np.maximum(np.abs(values).max(axis=(-2, -1)), np.finfo(float).tiny)
        worst_defect = max(worst_defect, float(defect.max()))
        samples += int(defect.size)
        entry: Dict[str, object] = {"rank": M.rank, "spd_margin": M.spd_margin}
        try:
            connection_form(M, degree=tol.surrogate_degree, tolerance=tol.surrogate_tolerance)
            entry["surrogate"] = "certified"
        except SurrogateError as exc:
            LOGGER.warning("%s: %s", role, exc)
            entry["surrogate"] = {"residual": exc.residual, "degree": exc.degree}
        details[role] = entry
    return [
        VerificationReport(
            check="validate",
            residual=worst_defect,
            tolerance=1e-12,
            samples=samples,
            seed=seed,
            witness=witness,
            details=details,
        )
    ]


def _curvature_map(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    worst, witness, samples = 0.0, Witness(note="self-adjoint everywhere"), 0
    details: Dict[str, object] = {}
    for role, M in inputs.metrics():
        residual = self_adjoint_residual(M)
        idx = np.unravel_index(int(np.argmax(residual)), residual.shape)
        if residual[idx] >= worst:
            worst = float(residual[idx])
            witness = Witness(s=M.domain.node(*idx), note=f"largest ‖PR - R*P‖/‖PR‖ ({role})")
        samples += int(residual.size)
        spectrum = curvature_spectrum_map(M)
        details[role] = {"min_eigenvalue": float(spectrum[..., 0].min()), "max_eigenvalue": float(spectrum[..., -1].max())}
        path = write_matrix_csv(M.domain, M.grid_curvature, out / f"curvature_{role}.csv", curvature_header(M.rank))
        details[role]["csv"] = path.name
    return [
        VerificationReport(
            check="curvature-map",
            residual=worst,
            tolerance=tol.exact,
            samples=samples,
            seed=seed,
            witness=witness,
            details=details,
        )
    ]


def _hypothesis(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    H = inputs.require_homomorphism("hypothesis")
    return [
        hypothesis_check(
            H,
            vector_samples=tol.vector_samples,
            tolerance=tol.hypothesis,
            seed=seed,
            mode=tol.hypothesis_mode,
        )
    ]


def _conclusion(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    H = inputs.require_homomorphism("conclusion")
    return [conclusion_check(H, tolerance_factor=tol.grid_factor, seed=seed, nodes=tol.circle_nodes)]


def nested_max_principle(
    u, domain: GridDomain, tolerance_factor: float = 10.0, count: int = 3, seed: Optional[int] = None
) -> VerificationReport:
    """Max-principle check of ``u`` on ``count`` nested subdomains; the worst one decides."""
    reports = []
    for sub in nested_subdomains(domain, count):
        try:
            reports.append(max_principle_check(u, sub, tolerance_factor=tolerance_factor))
        except DomainTooSmallError as exc:
            LOGGER.warning("Skipping subdomain: %s", exc)
    if not reports:
        return VerificationReport(
            check="max-principle",
            residual=float("inf"),
            tolerance=grid_tolerance(domain, tolerance_factor),
            seed=seed,
            status="inconclusive",
            witness=Witness(note="no subdomain had valid interior and boundary nodes"),
        )
    worst = max(reports, key=lambda r: r.residual - r.tolerance)
    return VerificationReport(
        check="max-principle",
        residual=worst.residual,
        tolerance=worst.tolerance,
        samples=sum(r.samples for r in reports),
        seed=seed,
        witness=worst.witness,
        details={"subdomains": [{"residual": r.residual, **r.details} for r in reports]},
    )


def _max_principle(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    H = inputs.require_homomorphism("max-principle")
    return [nested_max_principle(log_norm_field(H), inputs.domain, tol.grid_factor, seed=seed)]


def _proof_trace(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    H = inputs.require_homomorphism("proof-trace")
    parts = proof_trace(H, inputs.domain.center, trials=10, seed=seed, nodes=tol.circle_nodes)
    excess = {name: r.residual - r.tolerance for name, r in parts.items()}
    worst = max(excess, key=excess.get)
    return [
        VerificationReport(
            check="proof-trace",
            residual=excess[worst],
            tolerance=0.0,
            samples=sum(r.samples for r in parts.values()),
            seed=seed,
            witness=Witness(s=parts[worst].witness.s, v=parts[worst].witness.v, note=f"tightest step: {worst}"),
            details={name: r.to_dict() for name, r in parts.items()},
        )
    ]


def random_section(rng: np.random.Generator, rank: int, scale: float = 0.2) -> SectionField:
    """Constant unit-size vector plus a small holomorphic perturbation."""
    base = rng.standard_normal(rank) + 1j * rng.standard_normal(rank)
    bump = random_holomorphic_field(rng, rank, 1, degree=2, scale=scale)
    return SectionField(MatrixPolyField.constant(base.reshape(-1, 1)) + bump)


def _interior_samples(rng: np.random.Generator, domain: GridDomain, count: int, fraction: float = 0.8) -> np.ndarray:
    x = rng.uniform(-fraction, fraction, count) * domain.half_width_x
    y = rng.uniform(-fraction, fraction, count) * domain.half_width_y
    return domain.center + x + 1j * y


def _eq23(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    rng = np.random.default_rng(seed)
    step = default_fd_step(inputs.domain, tol.fd_step_factor)
    worst, witness, samples, vacuous = 0.0, Witness(note="no sample"), 0, 0
    polarized = 0.0
    for role, M in inputs.metrics():
        for _ in range(4):
            phi, psi = random_section(rng, M.rank), random_section(rng, M.rank)
            for z in _interior_samples(rng, M.domain, 5):
                try:
                    residual = eq23_residual(M, phi, z, step)
                except VanishingSectionError:
                    vacuous += 1
                    continue
                samples += 1
                polarized = max(polarized, polarized_identity_residual(M, phi, psi, z, step))
                if residual >= worst:
                    worst = residual
                    witness = Witness(s=complex(z), v=phi.value(z), note=f"{role} metric")
    return [
        VerificationReport(
            check="eq23",
            residual=worst,
            tolerance=tol.fd,
            samples=samples,
            vacuous=vacuous,
            seed=seed,
            witness=witness,
            details={"step": step, "polarized_residual": polarized},
        )
    ]


def _axioms(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    metrics = []
    if inputs.direct_image is not None:
        metrics.append(direct_image_sheaf_metric(inputs.direct_image, inputs.domain))
    elif inputs.source is not None:
        metrics.append(bundle_sheaf_metric(inputs.source))
    if inputs.source is not None and inputs.target is not None:
        metrics.append(hom_sheaf_metric(inputs.source, inputs.target))
    if inputs.lp is not None:
        metrics.append(lp_sheaf_metric(*inputs.lp, inputs.domain))
    reports = [metric_axioms_check(m, seed=seed) for m in metrics]
    worst = max(reports, key=lambda r: r.residual)
    return [
        VerificationReport(
            check="axioms",
            residual=worst.residual,
            tolerance=worst.tolerance,
            samples=sum(r.samples for r in reports),
            seed=seed,
            witness=worst.witness,
            details={r.details["metric"]: r.details["violations"] for r in reports},
        )
    ]


def _lp_stationarity(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    fm, rho = inputs.lp
    block = inputs.scenario.lp
    s0 = point_from_dict(block["s0"]) if "s0" in block else inputs.domain.center
    w = np.array([point_from_dict(v) for v in block["w"]]) if "w" in block else np.ones(fm.size, dtype=complex)
    probes = int(block.get("probes", 4))
    report = stationarity_check(fm, rho, s0, w, probes=probes, seed=seed, domain=inputs.domain)
    printed = stationarity_check(fm, rho, s0, w, probes=probes, seed=seed, variant="printed", domain=inputs.domain)
    report.details["printed_residual"] = printed.residual
    if fm.a == 2.0:
        diagonal = lp_diagonal_metric(fm, rho, inputs.domain)
        q = lp_metric(fm, rho, s0, w)
        h = float(np.vdot(w, diagonal.values(s0) @ w).real)
        report.details["diagonal_metric_gap"] = abs(q * q - h) / h
    if report.details["improvement"] < 10.0:
        LOGGER.warning("Stationary family improves on the constant family only %.1fx", report.details["improvement"])
    return [report]


def _hom_family(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    scenario = inputs.scenario
    block = scenario.hom_family or {}
    if inputs.source is None or inputs.target is None:
        raise ScenarioError("hom-family needs source and target metrics")
    if "generators" in block:
        generators = [_resolve_field(scenario, g, "hom_family.generators") for g in block["generators"]]
    elif inputs.homomorphism is not None:
        generators = [inputs.homomorphism.A]
    else:
        raise ScenarioError("hom-family needs generators or a homomorphism")
    return [
        hom_family_griffiths_check(
            inputs.source,
            inputs.target,
            generators,
            inputs.domain,
            seed=seed,
            families=int(block.get("families", 4)),
            ordering_tolerance=tol.exact,
            tolerance_factor=tol.grid_factor,
            nodes=tol.circle_nodes,
        )
    ]


def truncation_study(
    domain: GridDomain,
    ranks=(2, 4, 8, 16),
    seed: int = 0,
    tolerance_factor: float = 10.0,
    hypothesis_tolerance: float = 1e-8,
    circle_nodes: int = 64,
) -> VerificationReport:
    """psh margin of ``log ‖A‖`` for rank-N truncations; stable when consecutive Λ agree within tol_grid."""
    tol = grid_tolerance(domain, tolerance_factor)
    rows: List[Dict[str, object]] = []
    residual, witness = 0.0, Witness(note="stable")
    previous: Optional[float] = None
    for rank in ranks:
        source, target, A = truncation_fields(int(rank), domain)
        H = HomomorphismField(A, validate_metric(source, domain), validate_metric(target, domain))
        hypothesis = hypothesis_check(H, tolerance=hypothesis_tolerance, seed=seed)
        if not hypothesis.passed:
            return VerificationReport.not_applicable(
                "truncation-study", f"hypothesis fails at rank {rank}", seed=seed, hypothesis=hypothesis.to_dict()
            )
        verdict = psh_verdict(log_norm_field(H), nodes=circle_nodes, tolerance_factor=tolerance_factor)
        jump = abs(verdict.worst_lambda - previous) if previous is not None else 0.0
        excess = max(jump, -verdict.worst_lambda)
        if excess >= residual:
            residual = excess
            witness = Witness(s=verdict.worst_node, note=f"rank {rank}")
        previous = verdict.worst_lambda
        rows.append({"rank": int(rank), "verdict": verdict.verdict, "worst_lambda": verdict.worst_lambda, "margin": verdict.margin})
        LOGGER.info("Truncation rank %d: %s (worst Λ %.4f)", rank, verdict.verdict, verdict.worst_lambda)
    status = "inconclusive" if any(r["verdict"] == "inconclusive" for r in rows) else ""
    return VerificationReport(
        check="truncation-study",
        residual=residual,
        tolerance=tol,
        samples=len(rows),
        seed=seed,
        witness=witness,
        status=status,
        details={"ranks": rows},
    )


def _truncation(inputs: ScenarioInputs, tol: Tolerances, seed: int, out: Path) -> List[VerificationReport]:
    ranks = (inputs.scenario.truncation or {}).get("ranks", [2, 4, 8, 16])
    return [truncation_study(inputs.domain, ranks, seed, tol.grid_factor, tol.hypothesis, tol.circle_nodes)]


CHECK_RUNNERS: Dict[str, CheckRunner] = {
    "validate": _validate,
    "curvature-map": _curvature_map,
    "hypothesis": _hypothesis,
    "conclusion": _conclusion,
    "max-principle": _max_principle,
    "proof-trace": _proof_trace,
    "eq23": _eq23,
    "axioms": _axioms,
    "lp-stationarity": _lp_stationarity,
    "hom-family": _hom_family,
    "truncation-study": _truncation,
}


# -- maps -----------------------------------------------------------------


def write_map(kind: str, scenario: Union[Scenario, ScenarioInputs], out: Path) -> List[Path]:
    """Write the ``kind`` heatmap (curvature, norm, levi or lambda) as CSV under ``out``."""
    inputs = scenario if isinstance(scenario, ScenarioInputs) else build_inputs(scenario)
    if kind == "curvature":
        if not inputs.metrics():
            raise ScenarioError("Curvature map needs a metric")
        return [
            write_matrix_csv(M.domain, M.grid_curvature, out / f"curvature_{role}.csv", curvature_header(M.rank))
            for role, M in inputs.metrics()
        ]
    H = inputs.require_homomorphism(f"The {kind} map")
    if kind == "norm":
        return [write_scalar_csv(operator_norm_field(H), out / "norm.csv", "norm")]
    if kind == "levi":
        return [write_scalar_csv(levi_form_map(log_norm_field(H)), out / "levi.csv", "levi")]
    if kind == "lambda":
        nodes = inputs.scenario.tolerances.circle_nodes
        return [write_scalar_csv(lambda_map(log_norm_field(H), nodes=nodes), out / "lambda.csv", "lambda")]
    raise ScenarioError(f"Unknown map '{kind}'")


# -- scenario runs --------------------------------------------------------


def exit_status(reports: List[VerificationReport]) -> int:
    statuses = {r.status for r in reports}
    if "fail" in statuses:
        return EXIT_FAIL
    if "inconclusive" in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def _failed_validation(scenario: Scenario, seed: int, exc: LabError) -> VerificationReport:
    witness = getattr(exc, "witness", None)
    return VerificationReport(
        check="validate",
        residual=float("inf"),
        tolerance=1e-12,
        seed=seed,
        status="fail",
        witness=Witness(s=witness, note=str(exc)),
    )


def run_scenario(
    scenario: Union[Scenario, str, Path],
    out: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
) -> Tuple[int, List[VerificationReport]]:
    """Run every check of ``scenario`` in order and write the report bundle.

    Returns the exit status (0 pass, 1 fail, 3 inconclusive) and the reports.
    Parse and schema problems raise :class:`ScenarioError`.
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(Path(scenario).expanduser().resolve())
    seed = scenario.seed if seed is None else int(seed)
    out_dir = resolve_output_dir(str(out) if out is not None else None) / scenario.name
    out_dir.mkdir(parents=True, exist_ok=True)
    LOGGER.info("Running scenario '%s' (%d checks, seed %d) -> %s", scenario.name, len(scenario.checks), seed, out_dir)

    reports: List[VerificationReport] = []
    try:
        inputs = build_inputs(scenario)
    except (NotHermitianError, NotPositiveError) as exc:
        LOGGER.error("Metric validation failed: %s", exc)
        reports.append(_failed_validation(scenario, seed, exc))
        inputs = None

    if inputs is not None:
        for check in scenario.checks:
            try:
                produced = CHECK_RUNNERS[check](inputs, scenario.tolerances, seed, out_dir)
            except (ScenarioError, FieldError):
                raise
            except LabError as exc:
                LOGGER.warning("Check '%s' could not be decided: %s", check, exc)
                produced = [
                    VerificationReport(
                        check=check,
                        residual=float("inf"),
                        tolerance=0.0,
                        seed=seed,
                        status="inconclusive",
                        witness=Witness(note=str(exc)),
                    )
                ]
            for report in produced:
                LOGGER.info("%-16s %s (residual %.3e, tolerance %.1e)", check, report.status, report.residual, report.tolerance)
            reports.extend(produced)
        for kind in scenario.maps:
            for path in write_map(kind, inputs, out_dir):
                LOGGER.info("Wrote %s map -> %s", kind, path.name)

    for report in reports:
        write_report(report, out_dir / f"{report.check}.json")
    status = exit_status(reports)
    mismatches = {
        r.check: {"expected": scenario.expected[r.check], "actual": r.status}
        for r in reports
        if r.check in scenario.expected and scenario.expected[r.check] != r.status
    }
    for check, entry in mismatches.items():
        LOGGER.warning("Check '%s' expected %s but was %s", check, entry["expected"], entry["actual"])
    dump_json(
        {
            "scenario": scenario.name,
            "seed": seed,
            "prng": PRNG_NAME,
            "exit_status": status,
            "checks": [{"check": r.check, "status": r.status, "residual": r.residual, "tolerance": r.tolerance} for r in reports],
            "expected_mismatches": mismatches,
        },
        out_dir / "summary.json",
    )
    dump_json(
        {"timestamp": datetime.now(timezone.utc).isoformat(), "version": __version__, "output": str(out_dir)},
        out_dir / "metadata.json",
    )
    return status, reports


# -- falsification --------------------------------------------------------


def _nonvanishing_map(rng: np.random.Generator, rows: int, cols: int, domain: GridDomain, attempts: int = 8) -> MatrixPolyField:
    """Random holomorphic ``A`` whose operator norm stays away from zero on ``domain``."""
    A = None
    for _ in range(attempts):
        base = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        A = MatrixPolyField.constant(base) + random_holomorphic_field(rng, rows, cols, degree=2, scale=0.25)
        sigma = np.linalg.norm(A.sample(domain), ord=2, axis=(-2, -1))
        if sigma.min() >= 0.2 * sigma.max():
            return A
    return A


def _falsify_trial(rng: np.random.Generator, kind: str, domain: GridDomain) -> Dict[str, MatrixPolyField]:
    n = int(rng.integers(1, 4))
    source = random_metric_field(rng, n)
    if kind == "conformal":
        c = float(rng.uniform(0.25, 1.5))
        center = complex(*rng.uniform(-0.25, 0.25, 2))
        harmonic = complex(*(0.25 * rng.standard_normal(2)))
        target = raise_by_weight(source, subharmonic_weight(c, center, harmonic), domain)
        return {"source": source, "target": target, "homomorphism": MatrixPolyField.identity(n)}
    m = int(rng.integers(1, 4))
    target = random_metric_field(rng, m)
    A = _nonvanishing_map(rng, m, n, domain)
    if kind == "ordered-pair":
        low = curvature_spectrum_map(validate_metric(source, domain))[..., 0].min()
        high = curvature_spectrum_map(validate_metric(target, domain))[..., -1].max()
        shift = float(high - low) + 0.25
        if shift > 0:
            target = raise_by_weight(target, subharmonic_weight(shift), domain)
    return {"source": source, "target": target, "homomorphism": A}


def falsify(
    trials: int,
    seed: int = 0,
    resolution: int = 65,
    out: Optional[Union[str, Path]] = None,
    iterations: int = 60,
) -> Dict[str, object]:
    """Hunt for hypothesis-satisfying maps whose ``log ‖A‖`` is not psh.

    Trial ``t`` draws from ``default_rng([seed, t])`` and cycles through the
    conformal construction, curvature-ordered random pairs and unfiltered random
    pairs.  A counterexample is a trial whose hypothesis passes while the
    discrete Levi form dips below ``-tol_grid``, the psh verdict is not-psh, or
    the maximum principle fails on a nested subdomain.  The summary holds no
    timestamps, so seeded reruns are byte-identical.
    """
    if trials < 0:
        raise FieldError(f"trials must be non-negative, got {trials}")
    domain = GridDomain.square(0j, 0.5, resolution)
    tol = grid_tolerance(domain)
    counts = {kind: 0 for kind in FALSIFY_KINDS}
    passed_hypothesis = failed_hypothesis = inconclusive = 0
    max_principle_checks = 0
    min_levi = float("inf")
    counterexamples: List[Dict[str, object]] = []

    for t in tqdm(range(trials), desc="falsify", disable=progress_disabled()):
        rng = np.random.default_rng([seed, t])
        kind = FALSIFY_KINDS[t % len(FALSIFY_KINDS)]
        counts[kind] += 1
        fields = _falsify_trial(rng, kind, domain)
        H = HomomorphismField(
            fields["homomorphism"],
            validate_metric(fields["source"], domain),
            validate_metric(fields["target"], domain),
        )
        hypothesis = hypothesis_check(H, seed=t, iterations=iterations)
        if not hypothesis.passed:
            failed_hypothesis += 1
            continue
        passed_hypothesis += 1

        u = log_norm_field(H)
        levi = levi_form_map(u).values
        levi_min = float(np.nanmin(levi))
        min_levi = min(min_levi, levi_min)
        verdict = psh_verdict(u)
        principle = [max_principle_check(u, sub) for sub in nested_subdomains(domain, 3)]
        max_principle_checks += len(principle)

        reasons = []
        if levi_min < -tol:
            reasons.append("levi")
        if verdict.verdict == "not-psh":
            reasons.append("psh-verdict")
        if any(not r.passed for r in principle):
            reasons.append("max-principle")
        if verdict.verdict == "inconclusive":
            inconclusive += 1
        if reasons:
            idx = np.unravel_index(int(np.nanargmin(levi)), levi.shape)
            LOGGER.warning("Trial %d (%s): counterexample candidate (%s)", t, kind, ", ".join(reasons))
            counterexamples.append(
                {
                    "trial": t,
                    "kind": kind,
                    "seed": [seed, t],
                    "reasons": reasons,
                    "levi_min": levi_min,
                    "levi_witness": domain.node(*idx),
                    "psh": verdict.to_dict(),
                    "max_principle_residuals": [r.residual for r in principle],
                    "hypothesis": hypothesis.to_dict(),
                    "fields": {role: f.to_dict() for role, f in fields.items()},
                }
            )

    summary = {
        "trials": trials,
        "seed": seed,
        "prng": PRNG_NAME,
        "resolution": resolution,
        "levi_tolerance": tol,
        "kinds": counts,
        "hypothesis_passed": passed_hypothesis,
        "hypothesis_failed": failed_hypothesis,
        "inconclusive": inconclusive,
        "max_principle_checks": max_principle_checks,
        "min_levi": min_levi if passed_hypothesis else None,
        "counterexamples": counterexamples,
    }
    LOGGER.info(
        "Falsification: %d trials, %d passed the hypothesis, %d counterexamples",
        trials,
        passed_hypothesis,
        len(counterexamples),
    )
    if out is not None:
        dump_json(summary, resolve_output_dir(str(out)) / "falsify_summary.json")
    return summary
