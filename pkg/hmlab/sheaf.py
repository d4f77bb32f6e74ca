"""Metrics on sheaves of sections: bundle norms, direct images, the weighted L^a family and Hom norms.

The measure space behind the L^a and direct-image examples is always a finite
weighted point set ``{(x_i, μ_i)}``, so every fiber integral is an exact sum.
A fiber vector ``w`` is the column of its values ``w(x_i)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bundle import MetricField, SectionField, validate_metric
from .errors import FieldError, NotPositiveError, ScenarioError, ZeroVectorError
from .fields import (
    GridDomain,
    MatrixPolyField,
    ScalarSampleField,
    as_point,
    default_fd_step,
    exp_order_for,
    exp_surrogate,
    fd_derivative,
    random_holomorphic_field,
    scalar_field,
)
from .homomorphism import (
    HomomorphismField,
    curvature_ordering_check,
    log_norm_field,
    proof_section,
)
from .psh import grid_tolerance, psh_verdict
from .reports import VerificationReport, Witness

LOGGER = logging.getLogger("HermitianLab.Sheaf")

LP_VARIANTS = ("stationary", "printed")
GAMMA_METHODS = ("fd", "exact")

Evaluator = Callable[[MatrixPolyField, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SheafMetricSample:
    """``p(section)(s)`` for sections represented as ``rows × cols`` fields."""

    name: str
    evaluator: Evaluator
    rows: int
    domain: GridDomain
    cols: int = 1

    def evaluate(self, section: MatrixPolyField, points: Optional[np.ndarray] = None) -> np.ndarray:
        if section.shape != (self.rows, self.cols):
            raise FieldError(f"{self.name}: sections have shape {(self.rows, self.cols)}, got {section.shape}")
        points = self.domain.points() if points is None else points
        return np.asarray(self.evaluator(section, points), dtype=float)

    @staticmethod
    def add(phi: MatrixPolyField, psi: MatrixPolyField) -> MatrixPolyField:
        return phi + psi

    @staticmethod
    def scale(f: MatrixPolyField, phi: MatrixPolyField) -> MatrixPolyField:
        return phi.scaled_by(f)

    def random_section(self, rng: np.random.Generator, degree: int = 2) -> MatrixPolyField:
        return random_holomorphic_field(rng, self.rows, self.cols, degree)


def bundle_sheaf_metric(M: MetricField) -> SheafMetricSample:
    def evaluate(section: MatrixPolyField, points: np.ndarray) -> np.ndarray:
        f = section.evaluate(points)[..., 0]
        return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", np.conj(f), M.values(points), f).real, 0.0))

    return SheafMetricSample("bundle", evaluate, M.rank, M.domain)


def hom_sheaf_metric(source: MetricField, target: MetricField) -> SheafMetricSample:
    """Operator norm ``‖α(s)‖`` on homomorphism fields ``α: E → E'``."""

    def evaluate(section: MatrixPolyField, points: np.ndarray) -> np.ndarray:
        return HomomorphismField(section, source, target).norms(points)

    return SheafMetricSample("hom", evaluate, target.rank, source.domain, cols=source.rank)


def squared_sheaf_metric(metric: SheafMetricSample) -> SheafMetricSample:
    """``p(φ)²``: violates |f|-homogeneity; used to exercise the axioms check."""

    def evaluate(section: MatrixPolyField, points: np.ndarray) -> np.ndarray:
        return metric.evaluator(section, points) ** 2

    return SheafMetricSample(f"{metric.name}-squared", evaluate, metric.rows, metric.domain, metric.cols)


def metric_axioms_check(
    metric: SheafMetricSample,
    section_samples: int = 4,
    seed: int = 0,
    tolerance: float = 1e-10,
) -> VerificationReport:
    """Triangle inequality, ``|f|``-homogeneity and nondegeneracy on every grid node."""
    if section_samples < 2:
        raise FieldError("section_samples must be at least 2")
    rng = np.random.default_rng(seed)
    points = metric.domain.points()
    sections = [metric.random_section(rng) for _ in range(section_samples)]
    values = [metric.evaluate(phi, points) for phi in sections]

    worst = {"triangle": 0.0, "homogeneity": 0.0, "nondegeneracy": 0.0}
    witness = Witness(note="no violation")
    worst_value = -np.inf

    def record(kind: str, violation: np.ndarray, scale: np.ndarray) -> None:
        nonlocal witness, worst_value
        relative = violation / (1.0 + scale)
        idx = np.unravel_index(int(np.argmax(relative)), relative.shape)
        value = float(relative[idx])
        worst[kind] = max(worst[kind], value)
        if value > worst_value:
            worst_value = value
            witness = Witness(s=complex(points[idx]), note=kind)

    for i, phi in enumerate(sections):
        psi = sections[(i + 1) % len(sections)]
        p_sum = metric.evaluate(metric.add(phi, psi), points)
        record("triangle", np.maximum(p_sum - values[i] - values[(i + 1) % len(sections)], 0.0), p_sum)
        f = random_holomorphic_field(rng, 1, 1, degree=2)
        modulus = np.abs(f.evaluate(points)[..., 0, 0])
        scaled = metric.evaluate(metric.scale(f, phi), points)
        record("homogeneity", np.abs(scaled - modulus * values[i]), modulus * values[i])

    zero = metric.evaluate(MatrixPolyField.zeros(metric.rows, metric.cols), points)
    record("nondegeneracy", np.abs(zero), np.zeros_like(zero))
    degenerate = [i for i, v in enumerate(values) if not np.max(v) > 0.0]
    if degenerate:
        worst["nondegeneracy"] = np.inf
        witness = Witness(note=f"non-zero section {degenerate[0]} has vanishing norm")

    return VerificationReport(
        check="axioms",
        residual=max(worst.values()),
        tolerance=tolerance,
        samples=int(points.size * (2 * section_samples + 1)),
        seed=seed,
        witness=witness,
        details={"metric": metric.name, "violations": worst},
    )


@dataclass(frozen=True, eq=False)
class WeightField:
    """``ρ(s, x_i)`` as one real scalar field per fiber point.

    ``bounds`` holds the sup-norm certificate once :meth:`certified` has run.
    """

    rho: Tuple[MatrixPolyField, ...]
    bounds: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        rho = tuple(self.rho)
        for r in rho:
            if r.shape != (1, 1) or not r.is_hermitian_symmetric():
                raise FieldError("Each weight must be a real scalar field")
        object.__setattr__(self, "rho", rho)

    @property
    def size(self) -> int:
        return len(self.rho)

    def values(self, s) -> np.ndarray:
        """``ρ(s, x_i)`` with the fiber index last."""
        return np.stack([r.evaluate(s)[..., 0, 0].real for r in self.rho], axis=-1)

    def d_s(self, s) -> np.ndarray:
        return np.stack([r.d_s().evaluate(s)[..., 0, 0] for r in self.rho], axis=-1)

    def certificate(self, domain: GridDomain) -> Dict[str, float]:
        """Sup norms on the grid of ``ρ`` and its Wirtinger derivatives up to order two."""
        points = domain.points()
        bounds: Dict[str, float] = {}
        for name, op in (
            ("rho", lambda r: r),
            ("d_s", lambda r: r.d_s()),
            ("d_sbar", lambda r: r.d_sbar()),
            ("d_s_s", lambda r: r.d_s().d_s()),
            ("d_s_sbar", lambda r: r.d_s().d_sbar()),
            ("d_sbar_sbar", lambda r: r.d_sbar().d_sbar()),
        ):
            bounds[name] = float(max(np.abs(op(r).evaluate(points)).max() for r in self.rho))
        return bounds

    def certified(self, domain: GridDomain) -> "WeightField":
        return WeightField(self.rho, self.certificate(domain))


@dataclass(frozen=True, eq=False)
class FiberedMetric:
    """Finite fiber ``{x_i}`` with quadrature weights, fiber metrics ``h(s, x_i)`` and exponent ``a``."""

    weights: Tuple[float, ...]
    a: float = 2.0
    fiber_metrics: Tuple[MatrixPolyField, ...] = field(default=())

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.weights)
        if not weights or any(not w > 0 for w in weights):
            raise FieldError("Fiber weights must be positive")
        if not float(self.a) >= 2.0:
            raise FieldError(f"Exponent a must be at least 2, got {self.a}")
        metrics = tuple(self.fiber_metrics)
        if metrics and len(metrics) != len(weights):
            raise FieldError("Need one fiber metric per fiber point")
        if metrics and len({m.shape for m in metrics}) != 1:
            raise FieldError("Fiber metrics must share one rank")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "fiber_metrics", metrics)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def fiber_rank(self) -> int:
        return self.fiber_metrics[0].rows if self.fiber_metrics else 1

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    def metric_for(self, index: int) -> MatrixPolyField:
        if self.fiber_metrics:
            return self.fiber_metrics[index]
        return MatrixPolyField.identity(1)


def _check_fiber(fm: FiberedMetric, rho: WeightField) -> None:
    if rho.size != fm.size:
        raise FieldError(f"Weight field has {rho.size} fiber points, fibered metric has {fm.size}")


def lp_norms(fm: FiberedMetric, rho: WeightField, points, W: np.ndarray) -> np.ndarray:
    """Batched ``q(s, w) = (Σ μ_i |w_i|^a e^{ρ(s, x_i)})^{1/a}``; ``W`` has the fiber index last."""
    _check_fiber(fm, rho)
    mu = np.asarray(fm.weights)
    integrand = mu * np.abs(W) ** fm.a * np.exp(rho.values(points))
    return integrand.sum(axis=-1) ** (1.0 / fm.a)


def lp_metric(fm: FiberedMetric, rho: WeightField, s: complex, w) -> float:
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (fm.size,) or not np.all(np.isfinite(w)):
        raise FieldError(f"Fiber vector must be {fm.size} finite values")
    return float(lp_norms(fm, rho, as_point(s), w))


def lp_sheaf_metric(fm: FiberedMetric, rho: WeightField, domain: GridDomain) -> SheafMetricSample:
    def evaluate(section: MatrixPolyField, points: np.ndarray) -> np.ndarray:
        return lp_norms(fm, rho, points, section.evaluate(points)[..., 0])

    return SheafMetricSample(f"L^{fm.a:g}", evaluate, fm.size, domain)


def lp_diagonal_metric(fm: FiberedMetric, rho: WeightField, domain: GridDomain) -> MetricField:
    """``P(s) = diag(μ_i e^{ρ(s, x_i)})``: the hermitian metric the ``a = 2`` norm comes from."""
    _check_fiber(fm, rho)
    bound = max(float(np.abs(r.sample(domain)).max()) for r in rho.rho)
    order = exp_order_for(bound, tolerance=1e-16)
    blocks = [exp_surrogate(r, order) * mu for r, mu in zip(rho.rho, fm.weights)]
    return validate_metric(MatrixPolyField.block_diagonal(blocks), domain)


def lp_section(
    rho: WeightField,
    a: float,
    s0: complex,
    w,
    variant: str = "stationary",
) -> SectionField:
    """Holomorphic family ``s ↦ F(s, w)`` with ``F(s₀, w) = w``.

    ``stationary``: ``F(s, w)(x) = w(x)(1 - (2/a) ∂ρ(s₀, x)/∂s (s - s₀))``, for which
    ``∂̄γ(F)`` vanishes at ``s₀``; for ``a = 2`` it is the proof section of the
    diagonal metric.  ``printed``: ``w(x)(1 + ∂ρ(s₀, x)/∂s (s - s₀)/a)``.
    """
    if variant not in LP_VARIANTS:
        raise FieldError(f"Unknown section variant '{variant}', expected one of {LP_VARIANTS}")
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (rho.size,):
        raise FieldError(f"Fiber vector must have {rho.size} values")
    if not np.any(w):
        raise ZeroVectorError("Section family needs w != 0")
    z0 = as_point(s0)
    slope = rho.d_s(z0) * (-2.0 / a if variant == "stationary" else 1.0 / a)
    linear = slope * w
    return SectionField(
        MatrixPolyField.from_terms({(0, 0): (w - z0 * linear).reshape(-1, 1), (1, 0): linear.reshape(-1, 1)})
    )


def constant_section(w) -> SectionField:
    return SectionField.constant(w)


def dual_map_gamma(
    fm: FiberedMetric,
    rho: WeightField,
    s: complex,
    w,
    probe,
    method: str = "fd",
    step: Optional[float] = None,
) -> complex:
    """``γ_w(p) = ∂/∂t q(s, w + t p)`` at ``t = 0`` (complex Wirtinger derivative in ``t``).

    With this convention ``γ_w(p) = q^{1-a}/2 · Σ μ_i e^{ρ_i} |w_i|^{a-2} w̄_i p_i``, so
    ``γ_w(w) = q/2`` and for ``a = 2``, ``γ_w(p) = h_s(p, w) / (2 q)``.
    """
    if method not in GAMMA_METHODS:
        raise FieldError(f"Unknown gamma method '{method}', expected one of {GAMMA_METHODS}")
    w = np.asarray(w, dtype=complex).reshape(-1)
    p = np.asarray(probe, dtype=complex).reshape(-1)
    if not np.any(w):
        raise ZeroVectorError("γ is undefined at w = 0")
    z = as_point(s)
    q = lp_metric(fm, rho, z, w)
    if not q > 0:
        raise ZeroVectorError("q(s, w) vanishes")
    if method == "exact":
        mu = np.asarray(fm.weights)
        modulus = np.abs(w)
        power = np.where(modulus > 0, modulus, 1.0) ** (fm.a - 2.0) * (modulus > 0)
        terms = mu * np.exp(rho.values(z)) * power * np.conj(w) * p
        return complex(q ** (1.0 - fm.a) / 2.0 * terms.sum())
    pnorm = float(np.linalg.norm(p))
    if pnorm == 0.0:
        return 0j
    h = 1e-5 * float(np.linalg.norm(w)) / pnorm if step is None else step

    def along(t: complex) -> float:
        return lp_metric(fm, rho, z, w + t * p)

    return complex(fd_derivative(along, 0j, "s", h))


def stationarity_check(
    fm: FiberedMetric,
    rho: WeightField,
    s0: complex,
    w,
    probes: int = 4,
    seed: int = 0,
    variant: str = "stationary",
    step: Optional[float] = None,
    domain: Optional[GridDomain] = None,
) -> VerificationReport:
    """``|∂/∂s̄ γ_{F(s, w)}(probe)|`` at ``s₀`` by central differences, for random probes.

    The same quantity for the constant family ``F(s, w) = w`` is reported as the
    naive residual; the tolerance is ``100 step²`` relative to ``max |γ|``.
    """
    _check_fiber(fm, rho)
    z0 = as_point(s0)
    w = np.asarray(w, dtype=complex).reshape(-1)
    step = (default_fd_step(domain) if domain is not None else 1e-4) if step is None else step
    rng = np.random.default_rng(seed)
    probe_set = [rng.standard_normal(fm.size) + 1j * rng.standard_normal(fm.size) for _ in range(max(probes, 1))]
    family = lp_section(rho, fm.a, z0, w, variant=variant)
    naive = constant_section(w)

    def sbar_derivative(section: SectionField, probe: np.ndarray) -> complex:
        def gamma_along(s: complex) -> complex:
            return dual_map_gamma(fm, rho, s, section.value(s), probe, method="exact")

        return complex(fd_derivative(gamma_along, z0, "sbar", step))

    scale = max(1.0, max(abs(dual_map_gamma(fm, rho, z0, w, p, method="exact")) for p in probe_set))
    family_values = [abs(sbar_derivative(family, p)) for p in probe_set]
    naive_values = [abs(sbar_derivative(naive, p)) for p in probe_set]
    worst = int(np.argmax(family_values))
    residual = family_values[worst] / scale
    naive_residual = max(naive_values) / scale
    bounds = rho.bounds or (rho.certificate(domain) if domain is not None else {})
    return VerificationReport(
        check="lp-stationarity",
        residual=residual,
        tolerance=100.0 * step * step,
        samples=len(probe_set),
        seed=seed,
        witness=Witness(s=z0, v=probe_set[worst], note=f"probe with largest ∂̄γ ({variant} family)"),
        details={
            "a": fm.a,
            "variant": variant,
            "step": step,
            "naive_residual": naive_residual,
            "improvement": naive_residual / residual if residual > 0 else float("inf"),
            "gamma_convention": "gamma_w(p) = d/dt q(s, w + t p) at t = 0; gamma_w(w) = q / 2",
            "weight_bounds": bounds,
        },
    )


def direct_image_bundle(fm: FiberedMetric, domain: GridDomain) -> MetricField:
    """Product fibration ``S × {x_i}``: block-diagonal ``P = diag(μ_i h(s, x_i))``."""
    blocks = [fm.metric_for(i) * mu for i, mu in enumerate(fm.weights)]
    return validate_metric(MatrixPolyField.block_diagonal(blocks), domain)


def direct_image_metric(
    fm: FiberedMetric,
    sections: Sequence[MatrixPolyField],
    domain: GridDomain,
) -> ScalarSampleField:
    """``(Σ μ_i h(Φ, Φ)(s, x_i))^{1/2}`` per node, for ``Φ(·, x_i) = sections[i]``."""
    if len(sections) != fm.size:
        raise FieldError(f"Need one section per fiber point ({fm.size}), got {len(sections)}")
    points = domain.points()
    total = np.zeros(points.shape)
    for i, (mu, phi) in enumerate(zip(fm.weights, sections)):
        f = phi.evaluate(points)[..., 0]
        integrand = np.einsum("...i,...ij,...j->...", np.conj(f), fm.metric_for(i).evaluate(points), f).real
        bad = integrand < -1e-12 * (1.0 + np.abs(integrand))
        if bad.any():
            idx = np.unravel_index(int(np.argmax(bad)), bad.shape)
            raise NotPositiveError(complex(points[idx]), float(integrand[idx]))
        total += mu * np.maximum(integrand, 0.0)
    return ScalarSampleField(domain, np.sqrt(total))


def direct_image_sheaf_metric(fm: FiberedMetric, domain: GridDomain) -> SheafMetricSample:
    rank = fm.fiber_rank

    def evaluate(section: MatrixPolyField, points: np.ndarray) -> np.ndarray:
        values = section.evaluate(points)[..., 0]
        total = np.zeros(np.shape(points))
        for i, mu in enumerate(fm.weights):
            f = values[..., i * rank : (i + 1) * rank]
            total = total + mu * np.einsum("...i,...ij,...j->...", np.conj(f), fm.metric_for(i).evaluate(points), f).real
        return np.sqrt(np.maximum(total, 0.0))

    return SheafMetricSample("direct-image", evaluate, fm.size * rank, domain)


def sheaf_griffiths_curvature(M: MetricField, s0: complex, w, step: Optional[float] = None) -> float:
    """``K = -2 ξξ̄ log p(φ)`` at ``s₀`` for the proof section ``φ`` through ``w``."""
    z0 = as_point(s0)
    phi = proof_section(M, z0, w)
    step = default_fd_step(M.domain) if step is None else step

    def log_norm(s: complex) -> float:
        f = phi.value(s)
        return 0.5 * float(np.log(np.vdot(f, M.values(s) @ f).real))

    return float(-2.0 * fd_derivative(log_norm, z0, "s_sbar", step, domain=M.domain).real)


def hom_family_griffiths_check(
    source: MetricField,
    target: MetricField,
    generators: Sequence[MatrixPolyField],
    domain: Optional[GridDomain] = None,
    seed: int = 0,
    families: int = 4,
    ordering_tolerance: float = 1e-8,
    tolerance_factor: float = 10.0,
    nodes: int = 64,
) -> VerificationReport:
    """psh of ``log ‖α‖`` for holomorphic families ``α`` spanned by ``generators``.

    Runs only when ``inf K ≥ sup K'``; otherwise the report is not-applicable.
    """
    if not generators:
        raise FieldError("At least one generator is required")
    domain = domain or source.domain
    ordering = curvature_ordering_check(source, target, tolerance=ordering_tolerance)
    if not ordering.passed:
        LOGGER.info("Curvature ordering fails (residual %.3e); hom-family check not applicable", ordering.residual)
        return VerificationReport.not_applicable(
            "hom-family", "source curvature is not bounded below by target curvature", seed=seed, ordering=ordering.to_dict()
        )
    rng = np.random.default_rng(seed)
    candidates: List[MatrixPolyField] = list(generators)
    for _ in range(families):
        coeffs = rng.standard_normal(len(generators)) + 1j * rng.standard_normal(len(generators))
        combo = generators[0] * coeffs[0]
        for c, g in zip(coeffs[1:], generators[1:]):
            combo = combo + g * c
        candidates.append(combo)

    worst_lambda = np.inf
    witness = Witness(note="all families psh")
    verdicts: List[str] = []
    for index, alpha in enumerate(candidates):
        if alpha.is_zero():
            continue
        field_ = log_norm_field(HomomorphismField(alpha, source, target), domain)
        if not field_.any_valid():
            continue
        report = psh_verdict(field_, nodes=nodes, tolerance_factor=tolerance_factor)
        verdicts.append(report.verdict)
        if report.worst_lambda < worst_lambda:
            worst_lambda = report.worst_lambda
            witness = Witness(s=report.worst_node, note=f"family {index}: {report.verdict}")
    if not verdicts:
        raise FieldError("Every sampled family vanishes identically")
    tol = grid_tolerance(domain, tolerance_factor)
    status = "fail" if "not-psh" in verdicts else "inconclusive" if "inconclusive" in verdicts else "pass"
    return VerificationReport(
        check="hom-family",
        residual=max(0.0, -worst_lambda),
        tolerance=tol,
        samples=len(verdicts),
        seed=seed,
        witness=witness,
        status=status,
        details={"verdicts": verdicts, "ordering": ordering.details},
    )


def parse_weight_terms(payload: object) -> MatrixPolyField:
    """``rho_coeffs`` as field JSON or as ``[{j, k, re, im}]``."""
    if isinstance(payload, Mapping):
        return MatrixPolyField.from_dict(payload)
    if isinstance(payload, list):
        terms: Dict[Tuple[int, int], complex] = {}
        for entry in payload:
            key = (int(entry["j"]), int(entry["k"]))
            terms[key] = terms.get(key, 0) + complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        return scalar_field(terms) if terms else MatrixPolyField.zeros(1, 1)
    raise ScenarioError(f"Unsupported rho_coeffs payload: {payload!r}")


def load_fibered_config(
    payload: Mapping[str, object], domain: Optional[GridDomain] = None
) -> Tuple[FiberedMetric, WeightField]:
    """``{fiber_points: [{weight, rho_coeffs, metric?}], a}`` → ``(FiberedMetric, WeightField)``.

    With a ``domain`` the weight field comes back certified on it.
    """
    try:
        points = list(payload["fiber_points"])
        a = float(payload.get("a", 2.0))
        weights = [float(p["weight"]) for p in points]
        rho = [parse_weight_terms(p.get("rho_coeffs", [])) for p in points]
        metrics = [MatrixPolyField.from_dict(p["metric"]) for p in points if "metric" in p]
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"Malformed fibered metric: {exc}") from exc
    if metrics and len(metrics) != len(points):
        raise ScenarioError("Either every fiber point or none declares a metric")
    weight_field = WeightField(tuple(rho))
    if domain is not None:
        weight_field = weight_field.certified(domain)
    return FiberedMetric(tuple(weights), a, tuple(metrics)), weight_field
