"""Metric and curvature calculus for trivialized hermitian holomorphic bundles.

The metric is ``h(v, w) = w* P(s) v`` with ``P`` a positive hermitian matrix
field.  The Chern connection form in the holomorphic frame is
``θ = P⁻¹ ∂P/∂s`` and the curvature operator is
``R = -∂θ/∂s̄ = P⁻¹(∂̄P P⁻¹ ∂P - ∂∂̄P)``, evaluated pointwise by linear solves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
from scipy.linalg import eigh

from .errors import FieldError, NotHermitianError, NotPositiveError, SurrogateError, VanishingSectionError
from .fields import (
    GridDomain,
    MatrixPolyField,
    as_point,
    default_fd_step,
    exp_surrogate,
    fd_derivative,
)

LOGGER = logging.getLogger("HermitianLab.Bundle")

HERMITIAN_RTOL = 1e-12
Points = Union[complex, np.ndarray]


def _hermitian_part(matrices: np.ndarray) -> np.ndarray:
    return 0.5 * (matrices + np.conj(np.swapaxes(matrices, -1, -2)))


@dataclass(frozen=True, eq=False)
class MetricField:
    """A validated metric ``P`` on ``domain``; build it with :func:`validate_metric`."""

    P: MatrixPolyField
    domain: GridDomain
    spd_margin: float

    @property
    def rank(self) -> int:
        return self.P.rows

    @cached_property
    def dP(self) -> MatrixPolyField:
        return self.P.d_s()

    @cached_property
    def dbarP(self) -> MatrixPolyField:
        return self.P.d_sbar()

    @cached_property
    def ddbarP(self) -> MatrixPolyField:
        return self.dP.d_sbar()

    def values(self, s: Points) -> np.ndarray:
        return self.P.evaluate(s)

    def connection(self, s: Points) -> np.ndarray:
        """Pointwise ``P⁻¹ ∂P`` (the matrix ``A(s)`` of the covariant derivative)."""
        return np.linalg.solve(self.P.evaluate(s), self.dP.evaluate(s))

    def curvature(self, s: Points) -> np.ndarray:
        P = self.P.evaluate(s)
        theta = np.linalg.solve(P, self.dP.evaluate(s))
        return np.linalg.solve(P, self.dbarP.evaluate(s) @ theta - self.ddbarP.evaluate(s))

    @cached_property
    def grid_values(self) -> np.ndarray:
        return self.P.sample(self.domain)

    @cached_property
    def grid_curvature(self) -> np.ndarray:
        return self.curvature(self.domain.points())

    @cached_property
    def grid_cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.grid_values)

    def to_dict(self) -> dict:
        return {"P": self.P.to_dict(), "domain": self.domain.to_dict(), "spd_margin": self.spd_margin}


@dataclass(frozen=True, eq=False)
class SectionField:
    """A section ``φ(s) = (s, f(s))`` with ``f`` an ``n × 1`` field."""

    f: MatrixPolyField

    def __post_init__(self) -> None:
        if self.f.cols != 1:
            raise FieldError(f"Sections are column fields, got shape {self.f.shape}")

    @classmethod
    def constant(cls, vector) -> "SectionField":
        return cls(MatrixPolyField.constant(np.asarray(vector, dtype=complex).reshape(-1, 1)))

    @property
    def holomorphic(self) -> bool:
        return self.f.is_holomorphic()

    @property
    def rank(self) -> int:
        return self.f.rows

    def value(self, s: Points) -> np.ndarray:
        return self.f.evaluate(s)[..., 0]

    def derivative(self, s: Points) -> np.ndarray:
        return self.f.d_s().evaluate(s)[..., 0]


def validate_metric(P: MatrixPolyField, domain: GridDomain) -> MetricField:
    """Check that ``P`` is hermitian and positive definite at every node of ``domain``."""
    if P.rows != P.cols:
        raise FieldError(f"Metric field must be square, got {P.shape}")
    values = P.sample(domain)
    points = domain.points()
    scale = np.maximum(np.abs(values).max(axis=(-2, -1)), np.finfo(float).tiny)
    node_defect = np.abs(values - np.conj(np.swapaxes(values, -1, -2))).max(axis=(-2, -1)) / scale
    table_defect = P.hermitian_defect()
    if table_defect > HERMITIAN_RTOL or node_defect.max() > HERMITIAN_RTOL:
        worst = np.unravel_index(int(np.argmax(node_defect)), node_defect.shape)
        witness = complex(points[worst]) if node_defect.max() > HERMITIAN_RTOL else None
        raise NotHermitianError(witness, float(max(table_defect, node_defect.max())))

    eigenvalues = np.linalg.eigvalsh(_hermitian_part(values))[..., 0]
    worst = np.unravel_index(int(np.argmin(eigenvalues)), eigenvalues.shape)
    margin = float(eigenvalues[worst])
    if margin <= 0.0:
        raise NotPositiveError(complex(points[worst]), margin)
    LOGGER.debug("Validated rank-%d metric on %d nodes, margin %.3e", P.rows, eigenvalues.size, margin)
    return MetricField(P=P, domain=domain, spd_margin=margin)


def inner_product(M: MetricField, s: complex, v, w) -> complex:
    """``h_s(v, w) = ⟨P(s) v, w⟩``; linear in ``v``, conjugate-linear in ``w``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    if v.shape != (M.rank,) or w.shape != (M.rank,):
        raise FieldError(f"Vectors must have length {M.rank}, got {v.shape} and {w.shape}")
    return complex(np.vdot(w, M.values(as_point(s)) @ v))


def _h(P: np.ndarray, v: np.ndarray, w: np.ndarray) -> complex:
    return complex(np.vdot(w, P @ v))


def connection_form(
    M: MetricField,
    degree: int = 10,
    tolerance: float = 1e-8,
) -> MatrixPolyField:
    """Degree-``degree`` Taylor surrogate of ``P⁻¹ ∂P`` about the domain center.

    ``P⁻¹`` is expanded as a Neumann series around ``P(center)``.  The result is
    certified against pointwise solves at every grid node; :class:`SurrogateError`
    is raised when the relative residual exceeds ``tolerance``.
    """
    center = M.domain.center
    Q = M.P.shift(center)
    Q0_inv = np.linalg.inv(Q.coefficient(0, 0))
    inv0 = MatrixPolyField.constant(Q0_inv)
    E = (inv0 @ (Q - MatrixPolyField.constant(Q.coefficient(0, 0)))).truncate(degree)
    term = inv0
    inverse = inv0
    for _ in range(degree):
        term = (-(E @ term)).truncate(degree)
        if term.is_zero():
            break
        inverse = inverse + term
    theta = (inverse @ Q.d_s()).truncate(degree).shift(-center)

    points = M.domain.points()
    exact = M.connection(points)
    approx = theta.evaluate(points)
    residual = float(np.abs(approx - exact).max() / (1.0 + np.abs(exact).max()))
    if residual > tolerance:
        raise SurrogateError(residual, tolerance, degree)
    if residual > 0.1 * tolerance:
        LOGGER.warning("Connection surrogate residual %.2e is close to tolerance %.1e", residual, tolerance)
    return theta


def covariant_derivative(M: MetricField, phi: SectionField, s: complex) -> np.ndarray:
    """``∇_{∂/∂s} φ = ∂f/∂s + P⁻¹∂P f`` at ``s``."""
    if not phi.holomorphic:
        raise FieldError("Covariant derivative in the ∂/∂s direction expects a holomorphic section")
    if phi.rank != M.rank:
        raise FieldError(f"Section rank {phi.rank} does not match metric rank {M.rank}")
    z = as_point(s)
    return phi.derivative(z) + M.connection(z) @ phi.value(z)


def curvature_operator(M: MetricField, s: complex) -> np.ndarray:
    return M.curvature(as_point(s))


def self_adjoint_residual(M: MetricField, curvature: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-node ``‖PR - R*P‖ / ‖PR‖`` over the grid (absolute when ``PR`` vanishes)."""
    P = M.grid_values
    R = M.grid_curvature if curvature is None else curvature
    PR = P @ R
    defect = np.linalg.norm(PR - np.conj(np.swapaxes(R, -1, -2)) @ P, axis=(-2, -1))
    scale = np.linalg.norm(PR, axis=(-2, -1))
    return np.where(scale > 1e-14, defect / np.where(scale > 1e-14, scale, 1.0), defect)


def curvature_spectrum(M: MetricField, s: complex) -> np.ndarray:
    """Eigenvalues of ``R`` (ascending) as the generalized problem ``PR x = λ P x``."""
    z = as_point(s)
    P = M.values(z)
    PR = _hermitian_part(P @ M.curvature(z))
    return eigh(PR, _hermitian_part(P), eigvals_only=True)


def curvature_spectrum_map(M: MetricField) -> np.ndarray:
    """Per-node ascending curvature eigenvalues, batched through the Cholesky factor."""
    L = M.grid_cholesky
    PR = M.grid_values @ M.grid_curvature
    X = np.linalg.solve(L, PR)
    congruent = np.linalg.solve(L, np.conj(np.swapaxes(X, -1, -2)))
    return np.linalg.eigvalsh(_hermitian_part(congruent))


def eq23_residual(M: MetricField, phi: SectionField, s: complex, step: Optional[float] = None) -> float:
    """``|∂∂̄ log h(φ, φ) - RHS|`` with the left side by finite differences."""
    z = as_point(s)
    f = phi.value(z)
    P = M.values(z)
    norm2 = _h(P, f, f).real
    if not norm2 > 1e-300:
        raise VanishingSectionError(z)
    step = default_fd_step(M.domain) if step is None else step

    def log_norm2(point: complex) -> float:
        value = phi.value(point)
        return float(np.log(_h(M.values(point), value, value).real))

    lhs = fd_derivative(log_norm2, z, "s_sbar", step, domain=M.domain).real
    R = M.curvature(z)
    nabla = covariant_derivative(M, phi, z)
    h_curv = _h(P, f, R @ f).real
    cross = _h(P, nabla, f)
    rhs = -h_curv / norm2 + (_h(P, nabla, nabla).real * norm2 - abs(cross) ** 2) / norm2**2
    return float(abs(lhs - rhs))


def polarized_identity_residual(
    M: MetricField,
    phi: SectionField,
    psi: SectionField,
    s: complex,
    step: Optional[float] = None,
) -> float:
    """``|∂∂̄ h(φ, ψ) - (h(∇φ, ∇ψ) - h(Rφ, ψ))|`` for holomorphic ``φ, ψ``."""
    z = as_point(s)
    step = default_fd_step(M.domain) if step is None else step

    def pairing(point: complex) -> complex:
        return _h(M.values(point), phi.value(point), psi.value(point))

    lhs = complex(fd_derivative(pairing, z, "s_sbar", step, domain=M.domain))
    P = M.values(z)
    R = M.curvature(z)
    rhs = _h(P, covariant_derivative(M, phi, z), covariant_derivative(M, psi, z)) - _h(P, R @ phi.value(z), psi.value(z))
    scale = 1.0 + abs(rhs)
    return float(abs(lhs - rhs) / scale)


def compatibility_residual(
    M: MetricField,
    phi: SectionField,
    psi: SectionField,
    s: complex,
    step: Optional[float] = None,
) -> float:
    """``|∂h(φ, ψ)/∂s - h(∇φ, ψ)|`` (metric compatibility for holomorphic sections)."""
    z = as_point(s)
    step = default_fd_step(M.domain) if step is None else step

    def pairing(point: complex) -> complex:
        return _h(M.values(point), phi.value(point), psi.value(point))

    lhs = complex(fd_derivative(pairing, z, "s", step, domain=M.domain))
    rhs = _h(M.values(z), covariant_derivative(M, phi, z), psi.value(z))
    return float(abs(lhs - rhs))


def conformal_rescale(P: MatrixPolyField, u: MatrixPolyField, order: int = 10) -> MatrixPolyField:
    """``e^{-u} P`` with the exponential replaced by its order-``order`` series.

    For a real field ``u`` this shifts the curvature by ``+∂∂̄u`` times the identity.
    """
    if u.shape != (1, 1):
        raise FieldError("Conformal factor must be a scalar field")
    if not u.is_hermitian_symmetric():
        raise FieldError("Conformal factor must be real-valued")
    return P.scaled_by(exp_surrogate(-u, order))
