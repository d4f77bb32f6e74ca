"""Holomorphic bundle maps: operator norms, Griffiths curvature and the curvature-decrease hypothesis."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np
from scipy.linalg import eigh

from .bundle import MetricField, SectionField, _hermitian_part, covariant_derivative, curvature_spectrum_map
from .errors import FieldError, ZeroVectorError
from .fields import GridDomain, MatrixPolyField, ScalarSampleField, as_point, circle_points
from .psh import grid_tolerance, psh_verdict
from .reports import VerificationReport, Witness

LOGGER = logging.getLogger("HermitianLab.Homomorphism")

HYPOTHESIS_MODES = ("auto", "sampled", "optimized")
OPTIMIZED_MAX_RANK = 4
KERNEL_RTOL = 1e-12
FLAT_SECTION_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class HomomorphismField:
    """A holomorphic ``A(s): (ℂⁿ, h_s) → (ℂⁿ', h'_s)``."""

    A: MatrixPolyField
    source: MetricField
    target: MetricField

    def __post_init__(self) -> None:
        if not self.A.is_holomorphic():
            raise FieldError("Homomorphism field must be holomorphic (no s̄ terms)")
        if self.A.cols != self.source.rank or self.A.rows != self.target.rank:
            raise FieldError(
                f"Homomorphism of shape {self.A.shape} does not map rank {self.source.rank} to rank {self.target.rank}"
            )

    @property
    def domain(self) -> GridDomain:
        return self.source.domain

    def values(self, s: Union[complex, np.ndarray]) -> np.ndarray:
        return self.A.evaluate(s)

    def norms(self, points: Union[complex, np.ndarray]) -> np.ndarray:
        """``σ_max(L'* A L⁻*)`` with ``P = L L*`` and ``P' = L' L'*``."""
        L = np.linalg.cholesky(self.source.values(points))
        Lt = np.linalg.cholesky(self.target.values(points))
        B = np.conj(np.swapaxes(Lt, -1, -2)) @ self.A.evaluate(points)
        whitened = np.conj(np.swapaxes(np.linalg.solve(L, np.conj(np.swapaxes(B, -1, -2))), -1, -2))
        return np.linalg.norm(whitened, ord=2, axis=(-2, -1))

    def top_singular_vector(self, s: complex) -> np.ndarray:
        """An ``h``-unit vector attaining ``‖A(s)‖``."""
        z = as_point(s)
        P = _hermitian_part(self.source.values(z))
        A = self.A.evaluate(z)
        pulled = _hermitian_part(np.conj(A.T) @ self.target.values(z) @ A)
        _, vectors = eigh(pulled, P)
        return vectors[:, -1]


def _apply(M: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Apply per-node matrices (N, n, n) to stacked row vectors (N, C, n)."""
    return np.swapaxes(M @ np.swapaxes(V, -1, -2), -1, -2)


def _generalized_eigh(Q: np.ndarray, P: np.ndarray):
    """Batched ``Q x = λ P x``; eigenvectors are returned as rows."""
    L = np.linalg.cholesky(P)
    X = np.linalg.solve(L, Q)
    congruent = np.linalg.solve(L, np.conj(np.swapaxes(X, -1, -2)))
    values, Y = np.linalg.eigh(_hermitian_part(congruent))
    vectors = np.linalg.solve(np.conj(np.swapaxes(L, -1, -2)), Y)
    return values, np.swapaxes(vectors, -1, -2)


def sphere_sweep(polar: int = 7, azimuth: int = 12) -> np.ndarray:
    """Unit vectors ``(cos θ, e^{iφ} sin θ)`` covering ℂ² up to phase, one per row."""
    theta = np.linspace(0.0, 0.5 * np.pi, polar)
    phi = 2.0 * np.pi * np.arange(azimuth) / azimuth
    first = np.repeat(np.cos(theta), azimuth)
    second = np.outer(np.sin(theta), np.exp(1j * phi)).reshape(-1)
    return np.stack([first + 0j, second], axis=-1)


def griffiths_curvature(M: MetricField, s: complex, xi: complex, v) -> float:
    """``K_ξ(v) = |ξ|² h(v, R v) / h(v, v)``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape != (M.rank,):
        raise FieldError(f"Vector must have length {M.rank}")
    if not np.any(v):
        raise ZeroVectorError("Griffiths curvature is undefined at v = 0")
    z = as_point(s)
    P = M.values(z)
    R = M.curvature(z)
    return float(abs(complex(xi)) ** 2 * np.vdot(R @ v, P @ v).real / np.vdot(v, P @ v).real)


def operator_norm_field(H: HomomorphismField, domain: Optional[GridDomain] = None) -> ScalarSampleField:
    domain = domain or H.domain
    return ScalarSampleField(domain, H.norms(domain.points()))


def log_norm_field(H: HomomorphismField, domain: Optional[GridDomain] = None) -> ScalarSampleField:
    """``log ‖A‖`` on the grid, masked where ``A(s) = 0``."""
    return operator_norm_field(H, domain).log()


class _CurvatureForms:
    """Per-node hermitian forms of the hypothesis ``a/d - c/b``."""

    def __init__(self, H: HomomorphismField, domain: GridDomain):
        points = domain.points().reshape(-1)
        self.points = points
        A = H.A.evaluate(points)
        A_h = np.conj(np.swapaxes(A, -1, -2))
        P = H.source.values(points)
        Pt = H.target.values(points)
        self.P = _hermitian_part(P)
        self.Y = _hermitian_part(P @ H.source.curvature(points))
        self.Z = _hermitian_part(A_h @ Pt @ A)
        self.X = _hermitian_part(A_h @ (Pt @ H.target.curvature(points)) @ A)

    def evaluate(self, V: np.ndarray, floor: np.ndarray):
        """``(diff, valid, terms)``; ``terms`` carries the forms and their images for :meth:`gradient`."""
        images = tuple(_apply(M, V) for M in (self.X, self.P, self.Y, self.Z))
        a, b, c, d = (np.sum(np.conj(V) * image, axis=-1).real for image in images)
        valid = d > floor[:, None] * b
        safe_d = np.where(valid, d, 1.0)
        diff = np.where(valid, a / safe_d - c / b, -np.inf)
        return diff, valid, (a, b, c, safe_d) + images

    @staticmethod
    def gradient(terms) -> np.ndarray:
        a, b, c, d = (t[..., None] for t in terms[:4])
        XV, PV, YV, ZV = terms[4:]
        return (XV * d - a * ZV) / d**2 - (YV * b - c * PV) / b**2


def _ascend(forms: _CurvatureForms, V: np.ndarray, floor: np.ndarray, iterations: int = 150):
    """Projected gradient ascent of ``K'(Av) - K(v)`` on the unit sphere with step halving."""
    diff, valid, terms = forms.evaluate(V, floor)
    eta = np.full(diff.shape, 0.5)
    for _ in range(iterations):
        grad = np.where(valid[..., None], forms.gradient(terms), 0.0)
        gnorm = np.linalg.norm(grad, axis=-1, keepdims=True)
        trial = V + eta[..., None] * grad / np.where(gnorm > 0, gnorm, 1.0)
        trial /= np.linalg.norm(trial, axis=-1, keepdims=True)
        t_diff, t_valid, t_terms = forms.evaluate(trial, floor)
        better = t_diff > diff
        wide = better[..., None]
        V = np.where(wide, trial, V)
        diff = np.where(better, t_diff, diff)
        valid = np.where(better, t_valid, valid)
        terms = tuple(np.where(better if new.ndim == better.ndim else wide, new, old) for new, old in zip(t_terms, terms))
        eta = np.where(better, np.minimum(eta * 1.5, 1.0), eta * 0.5)
        if np.all(eta < 1e-10):
            break
    return V, diff


def hypothesis_check(
    H: HomomorphismField,
    domain: Optional[GridDomain] = None,
    vector_samples: int = 8,
    tolerance: float = 1e-8,
    seed: int = 0,
    mode: str = "auto",
    iterations: int = 150,
) -> VerificationReport:
    """Max of ``K'_ξ(Av) - K_ξ(v)`` over grid nodes and candidate vectors (ξ = ∂/∂s).

    Candidates are random unit vectors plus the generalized eigenvectors of the
    norm problem and of the source curvature.  In ``optimized`` mode (the default
    up to rank 4) each candidate is refined by gradient ascent; at rank 2 the best
    direction of a :func:`sphere_sweep` over the whole projective line joins the
    starts, so the search is global there.  Vectors in the kernel of ``A(s)`` are
    counted as vacuous.
    """
    if vector_samples < 1:
        raise FieldError("vector_samples must be at least 1")
    if mode not in HYPOTHESIS_MODES:
        raise FieldError(f"Unknown hypothesis mode '{mode}', expected one of {HYPOTHESIS_MODES}")
    if mode == "auto":
        mode = "optimized" if H.source.rank <= OPTIMIZED_MAX_RANK else "sampled"
    domain = domain or H.domain
    forms = _CurvatureForms(H, domain)
    nodes, n = forms.points.size, H.source.rank

    rng = np.random.default_rng(seed)
    random_vectors = rng.standard_normal((nodes, vector_samples, n)) + 1j * rng.standard_normal((nodes, vector_samples, n))
    norm_values, norm_vectors = _generalized_eigh(forms.Z, forms.P)
    _, curvature_vectors = _generalized_eigh(forms.Y, forms.P)
    V = np.concatenate([random_vectors, norm_vectors, curvature_vectors], axis=1)
    V /= np.linalg.norm(V, axis=-1, keepdims=True)
    floor = KERNEL_RTOL * np.maximum(norm_values[:, -1], np.finfo(float).tiny)
    if mode == "optimized" and n == 2:
        grid = sphere_sweep()
        sweep = np.broadcast_to(grid, (nodes,) + grid.shape)
        swept, _, _ = forms.evaluate(sweep, floor)
        best = sweep[np.arange(nodes), np.argmax(swept, axis=1)]
        V = np.concatenate([V, best[:, None, :]], axis=1)

    diff, valid, _ = forms.evaluate(V, floor)
    vacuous = int((~valid).sum())
    if mode == "optimized" and valid.any():
        V, diff = _ascend(forms, V, floor, iterations)
        valid = np.isfinite(diff)

    samples = int(valid.sum())
    if samples == 0:
        LOGGER.warning("Every hypothesis sample was vacuous (A vanishes on all candidates)")
        return VerificationReport(
            check="hypothesis",
            residual=0.0,
            tolerance=tolerance,
            vacuous=vacuous,
            seed=seed,
            witness=Witness(note="all samples vacuous"),
            details={"mode": mode},
        )
    flat = int(np.argmax(np.where(valid, diff, -np.inf)))
    node, cand = np.unravel_index(flat, diff.shape)
    residual = float(diff[node, cand])
    if vacuous:
        LOGGER.debug("%d hypothesis samples were vacuous (A v = 0)", vacuous)
    return VerificationReport(
        check="hypothesis",
        residual=residual,
        tolerance=tolerance,
        samples=samples,
        vacuous=vacuous,
        seed=seed,
        witness=Witness(s=complex(forms.points[node]), v=V[node, cand], note="max of K'(Av) - K(v)"),
        details={
            "mode": mode,
            "candidates_per_node": int(V.shape[1]),
            "min_difference": float(np.min(diff[valid])),
        },
    )


def conclusion_check(
    H: HomomorphismField,
    domain: Optional[GridDomain] = None,
    radii: Optional[List[float]] = None,
    tolerance_factor: float = 10.0,
    seed: Optional[int] = None,
    nodes: int = 64,
) -> VerificationReport:
    """psh verdict for ``log ‖A‖``."""
    if H.A.is_zero():
        raise FieldError("Conclusion check needs a homomorphism that is not identically zero")
    log_norm = log_norm_field(H, domain)
    if not log_norm.any_valid():
        raise FieldError("‖A‖ vanishes at every grid node")
    report = psh_verdict(log_norm, radii=radii, nodes=nodes, tolerance_factor=tolerance_factor)
    return report.to_report("conclusion", seed=seed)


def curvature_ordering_check(
    source: MetricField,
    target: MetricField,
    tolerance: float = 1e-8,
) -> VerificationReport:
    """``inf K ≥ sup K'`` over the grid, via per-node generalized eigenvalues."""
    low = curvature_spectrum_map(source)[..., 0]
    high = curvature_spectrum_map(target)[..., -1]
    i_low = np.unravel_index(int(np.argmin(low)), low.shape)
    i_high = np.unravel_index(int(np.argmax(high)), high.shape)
    inf_source, sup_target = float(low[i_low]), float(high[i_high])
    return VerificationReport(
        check="curvature-ordering",
        residual=sup_target - inf_source,
        tolerance=tolerance,
        samples=int(low.size + high.size),
        witness=Witness(s=target.domain.node(*i_high), note="node of the largest target curvature"),
        details={
            "inf_source_curvature": inf_source,
            "sup_target_curvature": sup_target,
            "source_witness": source.domain.node(*i_low),
        },
    )


def metric_comparison_check(
    h1: MetricField,
    h2: MetricField,
    tolerance_factor: float = 10.0,
    seed: int = 0,
) -> VerificationReport:
    """Maximum principle for two metrics on one bundle, through ``A = id: (E, h1) → (E, h2)``.

    Where the curvature of ``h2`` is below that of ``h1``, ``sup log(h2/h1)``
    over the domain is attained on the boundary; in particular ``h2 ≤ h1`` on the
    boundary forces ``h2 ≤ h1`` inside.
    """
    if h1.rank != h2.rank:
        raise FieldError("Metric comparison needs two metrics of the same rank")
    identity = HomomorphismField(MatrixPolyField.identity(h1.rank), h1, h2)
    hypothesis = hypothesis_check(identity, seed=seed)
    if not hypothesis.passed:
        return VerificationReport.not_applicable(
            "metric-comparison",
            "curvature of the second metric is not below the first",
            seed=seed,
            hypothesis=hypothesis.to_dict(),
        )
    log_ratio = log_norm_field(identity)
    values = log_ratio.values
    ring = np.ones(values.shape, dtype=bool)
    ring[1:-1, 1:-1] = False
    interior = np.where(~ring, values, -np.inf)
    idx = np.unravel_index(int(np.argmax(interior)), interior.shape)
    boundary_max = float(values[ring].max())
    return VerificationReport(
        check="metric-comparison",
        residual=float(interior[idx]) - boundary_max,
        tolerance=grid_tolerance(log_ratio.domain, tolerance_factor),
        samples=int(values.size),
        seed=seed,
        witness=Witness(s=log_ratio.domain.node(*idx), note="interior maximum of log(h2/h1)"),
        details={"boundary_dominated": boundary_max <= 0.0, "boundary_max": boundary_max},
    )


def proof_section(M: Union[MetricField, HomomorphismField], s0: complex, w) -> SectionField:
    """``f(s) = w + (s₀ - s) A(s₀) w`` with ``A = P⁻¹ ∂P``; covariantly constant at ``s₀``."""
    metric = M.source if isinstance(M, HomomorphismField) else M
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.shape != (metric.rank,):
        raise FieldError(f"Vector must have length {metric.rank}")
    if not np.any(w):
        raise ZeroVectorError("Proof section needs w != 0")
    z0 = as_point(s0)
    Aw = metric.connection(z0) @ w
    return SectionField(
        MatrixPolyField.from_terms({(0, 0): (w + z0 * Aw).reshape(-1, 1), (1, 0): (-Aw).reshape(-1, 1)})
    )


def cover_vectors(rank: int) -> List[np.ndarray]:
    """Basis vectors and their unit sums ``(e_i ± e_j)/√2``, ``(e_i ± i e_j)/√2``."""
    eye = np.eye(rank, dtype=complex)
    vectors = [eye[i] for i in range(rank)]
    for i in range(rank):
        for j in range(i + 1, rank):
            for phase in (1, -1, 1j, -1j):
                vectors.append((eye[i] + phase * eye[j]) / np.sqrt(2.0))
    return vectors


def _boundary_gap(domain: GridDomain, z: complex) -> float:
    offset = z - domain.center
    return min(domain.half_width_x - abs(offset.real), domain.half_width_y - abs(offset.imag))


def _section_norm(M: MetricField, phi: SectionField, points: np.ndarray) -> np.ndarray:
    f = phi.value(points)
    return np.sqrt(np.einsum("pi,pij,pj->p", np.conj(f), M.values(points), f).real)


def _stability_ratio(fitted: float, reference: float) -> float:
    if reference > 0:
        return fitted / reference
    return 1.0 if fitted == 0 else float("inf")


def bound32_check(
    M: MetricField,
    s0: complex,
    trials: int = 10,
    seed: int = 0,
    circle_nodes: int = 16,
) -> VerificationReport:
    """Fit ``C`` in ``|p(φ)(s) - p(φ)(s₀)|, p(∇φ)(s) ≤ C r p(φ)(s₀)`` for proof sections ``φ``.

    ``ε`` is half the distance from ``s₀`` to the boundary; ratios are taken on
    circles of radius ``ε/2, ε/4, ε/8``.  The constant must not depend on ``w``:
    the one fitted on the first half of the random vectors has to bound every
    vector tried (cover vectors included) within a factor 2, and it must not
    grow by more than 2 as the radius shrinks.  Vectors whose section is flat
    (constant 0) take no part in the ``w`` comparison.
    """
    if trials < 1:
        raise FieldError("trials must be at least 1")
    z0 = as_point(s0)
    epsilon = 0.5 * _boundary_gap(M.domain, z0)
    if not epsilon > 0:
        raise FieldError(f"Base point {z0!r} is not inside the domain")
    rng = np.random.default_rng(seed)
    ws = [rng.standard_normal(M.rank) + 1j * rng.standard_normal(M.rank) for _ in range(trials)]
    ws = [w / np.linalg.norm(w) for w in ws] + cover_vectors(M.rank)

    radii = [epsilon / 2, epsilon / 4, epsilon / 8]
    constants = np.zeros((len(ws), len(radii)))
    for i, w in enumerate(ws):
        phi = proof_section(M, z0, w)
        base = float(_section_norm(M, phi, np.array([z0]))[0])
        for k, r in enumerate(radii):
            ring = circle_points(z0, r, circle_nodes)
            drift = np.abs(_section_norm(M, phi, ring) - base)
            nabla = np.array([covariant_derivative(M, phi, z) for z in ring])
            grad = np.sqrt(np.einsum("pi,pij,pj->p", np.conj(nabla), M.values(ring), nabla).real)
            constants[i, k] = float(np.maximum(drift, grad).max() / (r * base))
    per_radius = constants.max(axis=0)
    per_w = constants.max(axis=1)
    fitted = float(per_radius.max())

    live = per_w > FLAT_SECTION_RTOL * max(fitted, 1.0)
    half = live[: (trials + 1) // 2]
    half_fit = float(per_w[: half.size][half].max()) if half.any() else 0.0
    w_ratio = _stability_ratio(float(per_w[live].max()) if live.any() else 0.0, half_fit)
    radius_ratio = _stability_ratio(fitted, float(per_radius[0]))
    worst = int(np.argmax(per_w))
    return VerificationReport(
        check="bound32",
        residual=max(w_ratio, radius_ratio),
        tolerance=2.0,
        samples=int(constants.size),
        seed=seed,
        witness=Witness(s=z0, v=ws[worst], note="w with the largest fitted constant"),
        details={
            "epsilon": epsilon,
            "radii": radii,
            "circle_nodes": circle_nodes,
            "constant_per_radius": per_radius.tolist(),
            "constant": fitted,
            "half_sample_constant": half_fit,
            "w_ratio": w_ratio,
            "radius_ratio": radius_ratio,
            "flat_vectors": int((~live).sum()),
            "constant_per_w_min": float(per_w[live].min()) if live.any() else 0.0,
            "constant_per_w_max": float(per_w.max()),
        },
    )


def inequality33_check(
    H: HomomorphismField,
    s0: complex,
    r: Optional[float] = None,
    trials: int = 10,
    seed: int = 0,
    nodes: int = 64,
    tolerance: float = 1e-10,
) -> VerificationReport:
    """``∫ log‖A‖(s₀ + r e^{2πiτ}) dτ ≥ log(p'(Aφ)(s₀)/p(φ)(s₀)) - C₁ r⁴`` with ``C₁ = 2C²``.

    ``φ`` is the proof section through the top singular vector at ``s₀`` and ``C``
    comes from :func:`bound32_check` on the source metric.
    """
    z0 = as_point(s0)
    norm0 = float(H.norms(z0))
    if not norm0 > 0:
        raise ZeroVectorError(f"‖A‖ vanishes at {z0!r}")
    bound = bound32_check(H.source, z0, trials=trials, seed=seed, circle_nodes=nodes)
    C = float(bound.details["constant"])
    epsilon1 = min(bound.details["epsilon"], 1.0 / (2.0 * C)) if C > 0 else bound.details["epsilon"]
    r = 0.5 * epsilon1 if r is None else float(r)
    if not 0 < r < epsilon1:
        raise FieldError(f"Radius {r} must lie in (0, {epsilon1})")
    C1 = 2.0 * C * C

    w = H.top_singular_vector(z0)
    phi = proof_section(H.source, z0, w)
    f0 = phi.value(z0)
    image = H.A.evaluate(z0) @ f0
    ratio = np.sqrt(np.vdot(image, H.target.values(z0) @ image).real / np.vdot(f0, H.source.values(z0) @ f0).real)
    with np.errstate(divide="ignore"):
        average = float(np.log(H.norms(circle_points(z0, r, nodes))).mean())
    rhs = float(np.log(ratio)) - C1 * r**4
    return VerificationReport(
        check="inequality33",
        residual=rhs - average,
        tolerance=tolerance,
        samples=nodes,
        seed=seed,
        witness=Witness(s=z0, v=w, note="top singular vector at s0"),
        details={"radius": r, "epsilon1": epsilon1, "C": C, "C1": C1, "circle_average": average, "lower_bound": rhs},
    )


def proof_trace(
    H: HomomorphismField, s0: complex, trials: int = 10, seed: int = 0, nodes: int = 64
) -> Dict[str, VerificationReport]:
    """bound32 on both metrics plus the mean-value inequality at ``ε₁/2`` and ``ε₁/4``."""
    reports = {
        "bound32-source": bound32_check(H.source, s0, trials=trials, seed=seed, circle_nodes=nodes),
        "bound32-target": bound32_check(H.target, s0, trials=trials, seed=seed, circle_nodes=nodes),
    }
    first = inequality33_check(H, s0, trials=trials, seed=seed, nodes=nodes)
    reports["inequality33-half"] = first
    reports["inequality33-quarter"] = inequality33_check(
        H, s0, r=0.25 * first.details["epsilon1"], trials=trials, seed=seed, nodes=nodes
    )
    return reports
