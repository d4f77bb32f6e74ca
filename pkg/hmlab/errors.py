from __future__ import annotations

from typing import Optional, Sequence


class LabError(ValueError):
    """Base class for every error raised by the laboratory."""


class FieldError(LabError):
    """Malformed field data (shapes, non-finite points, bad JSON)."""


class StencilOutsideDomainError(LabError):
    def __init__(self, point: complex, message: Optional[str] = None):
        self.point = point
        super().__init__(message or f"Finite-difference stencil leaves the domain at {point!r}")


class InvalidCircleError(LabError):
    """A circle average met a non-finite sample."""

    def __init__(self, center: complex, radius: float):
        self.center = center
        self.radius = radius
        super().__init__(f"Non-finite sample on circle |z - {center!r}| = {radius:g}")


class NotHermitianError(LabError):
    def __init__(self, witness: Optional[complex], residual: float):
        self.witness = witness
        self.residual = residual
        where = "coefficient table" if witness is None else f"node {witness!r}"
        super().__init__(f"Metric is not hermitian at {where} (residual {residual:.3e})")


class NotPositiveError(LabError):
    def __init__(self, witness: complex, eigenvalue: float):
        self.witness = witness
        self.eigenvalue = eigenvalue
        super().__init__(f"Metric is not positive definite at node {witness!r} (eigenvalue {eigenvalue:.3e})")


class SurrogateError(LabError):
    def __init__(self, residual: float, tolerance: float, degree: int):
        self.residual = residual
        self.tolerance = tolerance
        self.degree = degree
        super().__init__(
            f"Taylor surrogate of degree {degree} misses by {residual:.3e} (> {tolerance:.1e}); "
            "shrink the domain or raise the degree"
        )


class ZeroVectorError(LabError):
    """A Rayleigh quotient or dual map was requested at the zero vector."""


class VanishingSectionError(LabError):
    def __init__(self, point: complex):
        self.point = point
        super().__init__(f"Section vanishes at {point!r}")


class DomainTooSmallError(LabError):
    """No grid node admits the smallest circle radius."""


class ScenarioError(LabError):
    """Scenario file failed to parse or violates the schema."""


class UnknownGalleryEntryError(LabError):
    def __init__(self, name: str, available: Sequence[str]):
        self.name = name
        self.available = list(available)
        super().__init__(f"Unknown gallery entry '{name}'. Available: {', '.join(self.available)}")
