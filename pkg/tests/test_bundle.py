import numpy as np
import pytest
from numpy.testing import assert_allclose

from hmlab.bundle import (
    SectionField,
    compatibility_residual,
    conformal_rescale,
    connection_form,
    covariant_derivative,
    curvature_spectrum,
    eq23_residual,
    inner_product,
    polarized_identity_residual,
    self_adjoint_residual,
    validate_metric,
)
from hmlab.engine import random_section
from hmlab.errors import FieldError, NotHermitianError, NotPositiveError, SurrogateError
from hmlab.fields import GridDomain, MatrixPolyField, modulus_squared, scalar_field
from hmlab.gallery import diagonal, exp_metric, random_metric_field

DOMAIN = GridDomain.square(0j, 0.5, 33)
POINTS = [0.1 + 0.1j, -0.2 + 0.05j, 0.15 - 0.3j]


def test_validate_rejects_non_hermitian_metric():
    P = MatrixPolyField.from_terms({(0, 0): np.eye(2), (1, 0): [[0.0, 1.0], [0.0, 0.0]]})
    with pytest.raises(NotHermitianError):
        validate_metric(P, DOMAIN)


def test_validate_rejects_indefinite_metric():
    P = scalar_field({(0, 0): 1.0, (1, 1): -4.0})
    with pytest.raises(NotPositiveError) as info:
        validate_metric(P, DOMAIN)
    assert info.value.eigenvalue < 0
    assert abs(info.value.witness) ** 2 > 0.25


def test_validate_rejects_rectangular_field():
    with pytest.raises(FieldError):
        validate_metric(MatrixPolyField.constant(np.ones((2, 1))), DOMAIN)


def test_inner_product_is_conjugate_linear_in_second_slot():
    M = validate_metric(random_metric_field(np.random.default_rng(1), 2), DOMAIN)
    v, w = np.array([1.0, 1j]), np.array([0.5, -1.0])
    s = 0.1 + 0.2j
    assert inner_product(M, s, v, 1j * w) == pytest.approx(-1j * inner_product(M, s, v, w))
    assert inner_product(M, s, v, v).imag == pytest.approx(0.0, abs=1e-14)
    assert inner_product(M, s, v, v).real > 0


def test_scalar_weight_has_unit_curvature():
    M = validate_metric(exp_metric(-1.0, DOMAIN), DOMAIN)
    for s in POINTS:
        assert M.curvature(s)[0, 0].real == pytest.approx(1.0, abs=1e-9)


def test_flat_metric_has_zero_curvature():
    M = validate_metric(MatrixPolyField.identity(3), DOMAIN)
    assert_allclose(M.grid_curvature, 0.0)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_curvature_is_self_adjoint(rank):
    M = validate_metric(random_metric_field(np.random.default_rng(10 + rank), rank), DOMAIN)
    assert self_adjoint_residual(M).max() < 1e-8


def test_conformal_rescale_shifts_curvature_by_levi_form():
    M = validate_metric(random_metric_field(np.random.default_rng(2), 2), DOMAIN)
    c = 0.5
    rescaled = validate_metric(conformal_rescale(M.P, modulus_squared() * c, order=25), DOMAIN)
    for s in POINTS:
        assert_allclose(rescaled.curvature(s), M.curvature(s) + c * np.eye(2), atol=1e-8)


def test_conformal_rescale_requires_real_scalar():
    with pytest.raises(FieldError):
        conformal_rescale(MatrixPolyField.identity(2), scalar_field({(1, 0): 1.0}))


def test_curvature_spectrum_of_diagonal_metric():
    M = validate_metric(diagonal([exp_metric(-1.0, DOMAIN), MatrixPolyField.identity(1)]), DOMAIN)
    assert_allclose(curvature_spectrum(M, 0.2 - 0.1j), [0.0, 1.0], atol=1e-9)


def test_connection_surrogate_is_certified_at_high_degree():
    P = scalar_field({(0, 0): 1.0, (1, 1): 1.0})
    M = validate_metric(P, GridDomain.square(0j, 0.25, 17))
    theta = connection_form(M, degree=24, tolerance=1e-8)
    for s in (0.1 + 0.1j, -0.2 + 0.2j):
        assert theta.evaluate(s)[0, 0] == pytest.approx(M.connection(s)[0, 0], abs=1e-8)
    with pytest.raises(SurrogateError):
        connection_form(M, degree=2, tolerance=1e-8)


def test_covariant_derivative_of_constant_section_is_connection():
    M = validate_metric(random_metric_field(np.random.default_rng(3), 2), DOMAIN)
    w = np.array([1.0, -1j])
    s = 0.05 + 0.1j
    assert_allclose(covariant_derivative(M, SectionField.constant(w), s), M.connection(s) @ w)


def test_covariant_derivative_rejects_antiholomorphic_section():
    M = validate_metric(MatrixPolyField.identity(1), DOMAIN)
    with pytest.raises(FieldError):
        covariant_derivative(M, SectionField(scalar_field({(0, 1): 1.0})), 0j)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_log_norm_identity_holds_for_random_metrics(rank):
    rng = np.random.default_rng(20 + rank)
    M = validate_metric(random_metric_field(rng, rank), DOMAIN)
    for _ in range(3):
        phi, psi = random_section(rng, rank), random_section(rng, rank)
        for s in (0.1 + 0.1j, -0.25 + 0.2j, 0.3 - 0.15j):
            assert eq23_residual(M, phi, s) < 1e-5
            assert polarized_identity_residual(M, phi, psi, s) < 1e-5
            assert compatibility_residual(M, phi, psi, s) < 1e-6


def test_eq23_holds_for_random_metrics_of_rank_up_to_three():
    rng = np.random.default_rng(23)
    for i in range(20):
        rank = 1 + i % 3
        M = validate_metric(random_metric_field(rng, rank), DOMAIN)
        phi = random_section(rng, rank)
        points = rng.uniform(-0.4, 0.4, 50) + 1j * rng.uniform(-0.4, 0.4, 50)
        assert max(eq23_residual(M, phi, s) for s in points) < 1e-5
