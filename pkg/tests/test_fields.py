import numpy as np
import pytest
from numpy.testing import assert_allclose

from hmlab.errors import FieldError, InvalidCircleError, StencilOutsideDomainError
from hmlab.fields import (
    GridDomain,
    MatrixPolyField,
    circle_average,
    exp_order_for,
    exp_surrogate,
    fd_derivative,
    modulus_squared,
    random_holomorphic_field,
    scalar_field,
)

POINTS = np.array([0.1 + 0.2j, -0.3 + 0.05j, 0.25 - 0.4j])


def _random_field(rng, rows, cols, size=3):
    coeffs = rng.standard_normal((size, size, rows, cols)) + 1j * rng.standard_normal((size, size, rows, cols))
    return MatrixPolyField(coeffs)


def test_grid_domain_forces_odd_resolution_and_row_major_layout():
    domain = GridDomain.square(center=1 + 1j, half_width=0.5, resolution=64)
    assert domain.resolution == 65
    points = domain.points()
    assert points.shape == (65, 65)
    assert points[0, 0] == pytest.approx(0.5 + 0.5j)
    assert points[0, 1].real > points[0, 0].real
    assert points[1, 0].imag > points[0, 0].imag
    assert domain.node(32, 32) == pytest.approx(1 + 1j)


def test_grid_domain_shrink_keeps_nodes_aligned():
    domain = GridDomain.square(0j, 1.0, 65)
    sub = domain.shrink(8)
    assert sub.resolution == 49
    assert sub.spacing == pytest.approx(domain.spacing)
    assert_allclose(sub.xs, domain.xs[8:-8])
    with pytest.raises(FieldError):
        domain.shrink(32)


def test_grid_domain_dict_round_trip():
    domain = GridDomain(center=0.25 - 0.5j, half_width_x=0.5, half_width_y=0.25, resolution=33)
    assert GridDomain.from_dict(domain.to_dict()) == domain


def test_evaluate_matches_double_sum():
    field = MatrixPolyField.from_terms({(0, 0): [[1.0]], (2, 1): [[2 - 1j]], (0, 3): [[0.5j]]})
    s = 0.3 - 0.7j
    expected = 1.0 + (2 - 1j) * s**2 * np.conj(s) + 0.5j * np.conj(s) ** 3
    assert field.evaluate(s)[0, 0] == pytest.approx(expected)


def test_field_product_is_pointwise():
    rng = np.random.default_rng(3)
    F, G = _random_field(rng, 2, 3), _random_field(rng, 3, 2, size=2)
    assert_allclose((F @ G).evaluate(POINTS), F.evaluate(POINTS) @ G.evaluate(POINTS), rtol=1e-12, atol=1e-12)


def test_adjoint_is_pointwise_conjugate_transpose():
    rng = np.random.default_rng(4)
    F = _random_field(rng, 2, 3)
    values = F.evaluate(POINTS)
    assert_allclose(F.adjoint().evaluate(POINTS), np.conj(np.swapaxes(values, -1, -2)), atol=1e-12)
    assert (F.adjoint() @ F).is_hermitian_symmetric()


def test_shift_re_expands_about_new_center():
    rng = np.random.default_rng(5)
    F = _random_field(rng, 2, 2, size=4)
    c = 0.4 - 0.3j
    assert_allclose(F.shift(c).evaluate(POINTS), F.evaluate(POINTS + c), rtol=1e-11, atol=1e-11)


def test_wirtinger_derivatives_of_monomial():
    field = scalar_field({(2, 1): 1.0})
    s = 0.5 + 0.25j
    assert field.d_s().evaluate(s)[0, 0] == pytest.approx(2 * s * np.conj(s))
    assert field.d_sbar().evaluate(s)[0, 0] == pytest.approx(s**2)
    assert MatrixPolyField.identity(2).d_s().is_zero()


def test_truncate_drops_high_total_degree():
    field = scalar_field({(0, 0): 1.0, (1, 1): 1.0, (2, 2): 1.0})
    assert field.truncate(2).degree == 2
    assert field.truncate(3).evaluate(0.5)[0, 0] == pytest.approx(1.25)


def test_random_holomorphic_field_has_no_sbar_terms():
    rng = np.random.default_rng(6)
    field = random_holomorphic_field(rng, 2, 1, degree=3)
    assert field.is_holomorphic()
    assert field.shape == (2, 1)


@pytest.mark.parametrize("c", [1.0, -1.0, 0.5])
def test_exp_surrogate_tracks_exponential(c):
    domain = GridDomain.square(0j, 0.5, 17)
    order = exp_order_for(abs(c) * 0.5, tolerance=1e-16)
    surrogate = exp_surrogate(modulus_squared() * c, order)
    points = domain.points()
    assert_allclose(surrogate.sample(domain)[..., 0, 0].real, np.exp(c * np.abs(points) ** 2), rtol=1e-13)


def test_exp_surrogate_requires_scalar_field():
    with pytest.raises(FieldError):
        exp_surrogate(MatrixPolyField.identity(2))


def test_modulus_squared_with_center():
    field = modulus_squared(1 - 1j)
    assert field.evaluate(2 + 0j)[0, 0] == pytest.approx(2.0)
    assert field.is_hermitian_symmetric()


def test_fd_derivatives_of_polynomials():
    s = 0.2 + 0.1j
    assert complex(fd_derivative(lambda z: z**2, s, "s", 1e-4)) == pytest.approx(2 * s, abs=1e-8)
    assert abs(complex(fd_derivative(lambda z: z**2, s, "sbar", 1e-4))) < 1e-8
    assert complex(fd_derivative(lambda z: abs(z) ** 2, s, "s_sbar", 1e-3)).real == pytest.approx(1.0, abs=1e-8)


def test_fd_stencil_must_stay_in_domain():
    domain = GridDomain.square(0j, 0.5, 17)
    with pytest.raises(StencilOutsideDomainError):
        fd_derivative(lambda z: z, 0.5 + 0j, "s", 1e-3, domain=domain)


def test_circle_average_of_quadratic():
    r = 0.3
    assert circle_average(lambda z: z.real**2, 0j, r) == pytest.approx(r * r / 2)


def test_circle_average_rejects_bad_input():
    with pytest.raises(FieldError):
        circle_average(lambda z: z.real, 0j, 0.1, nodes=8)
    with pytest.raises(InvalidCircleError):
        circle_average(lambda z: np.where(z.real > 0, 0.0, np.nan), 0j, 0.1)


def test_field_json_rejects_malformed_payload():
    with pytest.raises(FieldError):
        MatrixPolyField.from_dict({"coeffs": []})
    field = MatrixPolyField.from_dict({"rows": 1, "cols": 1, "coeffs": [{"j": 1, "k": 1, "matrix": [[{"re": 1.0}]]}]})
    assert field.evaluate(0.5)[0, 0] == pytest.approx(0.25)


def test_fd_derivatives_match_wirtinger_on_random_points():
    rng = np.random.default_rng(8)
    coeffs = rng.standard_normal((4, 4, 2, 2)) + 1j * rng.standard_normal((4, 4, 2, 2))
    j, k = np.indices((4, 4))
    coeffs[j + k > 3] = 0.0
    field = MatrixPolyField(coeffs)
    points = rng.uniform(-0.45, 0.45, 100) + 1j * rng.uniform(-0.45, 0.45, 100)
    for s in points:
        for which in ("s", "sbar"):
            expected = field.wirtinger(which).evaluate(s)
            assert_allclose(fd_derivative(field.evaluate, s, which, 1e-4), expected, atol=1e-6)
        mixed = field.d_s().d_sbar().evaluate(s)
        assert_allclose(fd_derivative(field.evaluate, s, "s_sbar", 1e-3), mixed, atol=1e-6)


def test_circle_average_is_exact_once_nodes_exceed_the_degree():
    def u(z):
        return np.real(z**4 + 2 * z * np.conj(z) ** 3 - 0.5j * z**2) + np.abs(z - 0.1) ** 4

    for z0, r in [(0j, 0.3), (0.2 - 0.1j, 0.15)]:
        coarse = circle_average(u, z0, r, nodes=16)
        fine = circle_average(u, z0, r, nodes=32)
        assert abs(coarse - fine) < 1e-10
