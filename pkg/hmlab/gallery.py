"""Prebuilt scenarios and random metric generators."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import UnknownGalleryEntryError
from .fields import (
    GridDomain,
    MatrixPolyField,
    exp_order_for,
    exp_surrogate,
    modulus_squared,
    random_holomorphic_field,
    scalar_field,
)
from .scenario import Scenario

LOGGER = logging.getLogger("HermitianLab.Gallery")

UNIT_SQUARE = GridDomain.square(center=0j, half_width=0.5, resolution=65)
FULL_PIPELINE = ["validate", "curvature-map", "hypothesis", "conclusion", "max-principle", "proof-trace", "eq23"]


def _max_modulus_squared(domain: GridDomain, center: complex = 0j) -> float:
    corner = abs(domain.center - center) + np.hypot(domain.half_width_x, domain.half_width_y)
    return float(corner**2)


def exp_metric(c: float, domain: GridDomain, center: complex = 0j, tolerance: float = 1e-16) -> MatrixPolyField:
    """Scalar ``e^{c |s - center|²}`` as a truncated series accurate to ``tolerance`` on ``domain``."""
    bound = abs(c) * _max_modulus_squared(domain, center)
    order = exp_order_for(bound, tolerance=tolerance)
    return exp_surrogate(modulus_squared(center) * c, order)


def diagonal(entries: Sequence[MatrixPolyField]) -> MatrixPolyField:
    return MatrixPolyField.block_diagonal(list(entries))


def flat(rank: int) -> MatrixPolyField:
    return MatrixPolyField.identity(rank)


@dataclass
class GalleryEntry:
    name: str
    description: str
    builder: Callable[[], Scenario]
    parameters: Dict[str, object] = field(default_factory=dict)

    def build(self) -> Scenario:
        scenario = self.builder()
        scenario.name = self.name
        return scenario

    @property
    def expected(self) -> Dict[str, str]:
        return self.build().expected


def _scenario(
    checks: List[str],
    source: Optional[MatrixPolyField] = None,
    target: Optional[MatrixPolyField] = None,
    homomorphism: Optional[MatrixPolyField] = None,
    domain: GridDomain = UNIT_SQUARE,
    expected: Optional[Dict[str, str]] = None,
    **extra,
) -> Scenario:
    return Scenario(
        name="",
        domain=domain,
        checks=checks,
        seed=0,
        source=source.to_dict() if source is not None else None,
        target=target.to_dict() if target is not None else None,
        homomorphism=homomorphism.to_dict() if homomorphism is not None else None,
        expected=expected if expected is not None else {check: "pass" for check in checks},
        **extra,
    )


def _flat_identity() -> Scenario:
    return _scenario(FULL_PIPELINE + ["axioms"], flat(2), flat(2), flat(2), maps=["curvature", "norm"])


def _berndtsson_case() -> Scenario:
    e = exp_metric(1.0, UNIT_SQUARE)
    target = diagonal([e, e @ scalar_field({(0, 0): 1.0, (1, 1): 1.0})])
    return _scenario(FULL_PIPELINE, flat(2), target, flat(2))


def _conformal_ordered() -> Scenario:
    return _scenario(
        FULL_PIPELINE + ["axioms"],
        flat(1),
        exp_metric(1.0, UNIT_SQUARE),
        flat(1),
        maps=["norm", "levi", "lambda"],
    )


def _anti_ordered() -> Scenario:
    checks = ["validate", "hypothesis", "conclusion", "max-principle"]
    return _scenario(
        checks,
        flat(1),
        exp_metric(-1.0, UNIT_SQUARE),
        flat(1),
        expected={"validate": "pass", "hypothesis": "fail", "conclusion": "fail", "max-principle": "fail"},
        maps=["norm", "lambda"],
    )


def _rank2_diagonal() -> Scenario:
    source = diagonal([flat(1), exp_metric(-1.0, UNIT_SQUARE)])
    target = diagonal([exp_metric(1.0, UNIT_SQUARE), exp_metric(0.5, UNIT_SQUARE)])
    A = MatrixPolyField.from_terms({(0, 0): [[1.0, 0.0], [0.0, 2.0]], (1, 0): [[0.0, 1.0], [0.0, 0.0]]})
    swap = MatrixPolyField.constant([[0.0, 1.0], [1.0, 0.0]])
    return _scenario(
        FULL_PIPELINE + ["hom-family"],
        source,
        target,
        A,
        hom_family={"generators": [A.to_dict(), swap.to_dict()], "families": 4},
        maps=["curvature", "norm", "levi"],
    )


def _lp_example() -> Scenario:
    rho = [
        scalar_field({(1, 1): 1.0}),
        scalar_field({(1, 0): 0.5, (0, 1): 0.5, (1, 1): 0.3}),
        scalar_field({(2, 0): 0.2, (0, 2): 0.2, (0, 0): -0.1}),
    ]
    lp = {
        "a": 4.0,
        "fiber_points": [
            {"weight": weight, "rho_coeffs": r.to_dict()} for weight, r in zip((1.0, 0.5, 2.0), rho)
        ],
        "s0": {"re": 0.1, "im": 0.05},
        "w": [{"re": 1.0, "im": 0.0}, {"re": 0.5, "im": -0.5}, {"re": -0.3, "im": 0.2}],
        "probes": 4,
    }
    return _scenario(["axioms", "lp-stationarity"], lp=lp)


def _direct_image_product() -> Scenario:
    fiber = exp_metric(-1.0, UNIT_SQUARE)
    direct_image = {
        "fiber_points": [
            {"weight": 1.0, "metric": fiber.to_dict()},
            {"weight": 2.0, "metric": fiber.to_dict()},
        ]
    }
    return _scenario(["validate", "curvature-map", "eq23", "axioms"], direct_image=direct_image, maps=["curvature"])


def _truncation_study() -> Scenario:
    return _scenario(
        ["truncation-study"],
        domain=UNIT_SQUARE.with_resolution(33),
        truncation={"ranks": [2, 4, 8, 16]},
    )


def _hom_family() -> Scenario:
    domain = GridDomain.square(center=1.0, half_width=0.5, resolution=65)
    A0 = np.array([[1.0, 0.5], [0.0, 1.0]])
    A = MatrixPolyField.from_terms({(1, 0): A0})
    return _scenario(
        ["validate", "hypothesis", "conclusion", "hom-family"],
        flat(2),
        flat(2),
        A,
        domain=domain,
        hom_family={"generators": [A.to_dict()], "families": 2},
    )


GALLERY: Dict[str, GalleryEntry] = {
    entry.name: entry
    for entry in (
        GalleryEntry("flat-identity", "h = h' = I₂, A = id; every curvature vanishes", _flat_identity),
        GalleryEntry(
            "berndtsson-case",
            "flat source, A = id, target with seminegative curvature",
            _berndtsson_case,
        ),
        GalleryEntry("conformal-ordered", "h ≡ 1, h' = e^{|s|²}, A = id", _conformal_ordered, {"c": 1.0}),
        GalleryEntry("anti-ordered", "h ≡ 1, h' = e^{-|s|²}, A = id (hypothesis fails)", _anti_ordered, {"c": -1.0}),
        GalleryEntry(
            "rank2-diagonal",
            "h = diag(1, e^{-|s|²}), h' = diag(e^{|s|²}, e^{|s|²/2}), A = [[1, s], [0, 2]]",
            _rank2_diagonal,
        ),
        GalleryEntry("lp-example", "weighted L^4 norm over three fiber points", _lp_example, {"a": 4.0}),
        GalleryEntry(
            "direct-image-product",
            "direct image of the product fibration with fiber metric e^{-|s|²}",
            _direct_image_product,
        ),
        GalleryEntry(
            "truncation-study",
            "diagonal rank-N truncations, N in {2, 4, 8, 16}, of a Hilbert-bundle map",
            _truncation_study,
            {"ranks": [2, 4, 8, 16]},
        ),
        GalleryEntry("hom-family", "A(s) = s A0 between flat metrics on a domain avoiding 0", _hom_family),
    )
}


def gallery_names() -> List[str]:
    return list(GALLERY)


def gallery_entry(name: str) -> GalleryEntry:
    try:
        return GALLERY[name]
    except KeyError:
        raise UnknownGalleryEntryError(name, gallery_names()) from None


def gallery(name: str) -> Scenario:
    return gallery_entry(name).build()


def truncation_fields(rank: int, domain: GridDomain) -> Tuple[MatrixPolyField, MatrixPolyField, MatrixPolyField]:
    """Flat source, ``h' = diag(e^{λ_k |s|²})`` with ``λ_k = 1 + 1/k`` and ``A = diag(1/k)``."""
    ks = np.arange(1, rank + 1)
    target = diagonal([exp_metric(1.0 + 1.0 / k, domain) for k in ks])
    return flat(rank), target, MatrixPolyField.constant(np.diag(1.0 / ks))


# -- random generators ----------------------------------------------------


def random_metric_field(rng: np.random.Generator, rank: int, scale: float = 0.5) -> MatrixPolyField:
    """``I + G* G`` with ``G`` holomorphic of degree 2: positive definite everywhere."""
    G = random_holomorphic_field(rng, rank, rank, degree=2, scale=scale)
    return MatrixPolyField.identity(rank) + (G.adjoint() @ G)


def subharmonic_weight(c: float, center: complex = 0j, harmonic: complex = 0j) -> MatrixPolyField:
    """``c |s - center|² + 2 Re(harmonic · s)``: Levi form ``c``."""
    u = modulus_squared(center) * c
    if harmonic:
        u = u + scalar_field({(1, 0): harmonic, (0, 1): np.conj(harmonic)})
    return u


def raise_by_weight(P: MatrixPolyField, u: MatrixPolyField, domain: GridDomain, tolerance: float = 1e-15) -> MatrixPolyField:
    """``e^{u} P`` with ``u`` subharmonic: lowers the curvature by ``∂∂̄u``."""
    bound = float(np.abs(u.sample(domain)).max())
    return P.scaled_by(exp_surrogate(u, exp_order_for(bound, tolerance=tolerance)))
