import numpy as np
import pytest
from numpy.testing import assert_allclose

from hmlab.errors import DomainTooSmallError, FieldError, InvalidCircleError
from hmlab.fields import GridDomain, ScalarSampleField
from hmlab.psh import (
    grid_tolerance,
    lambda_estimate,
    lambda_map,
    levi_form_map,
    max_principle_check,
    nested_subdomains,
    psh_verdict,
    xi_xi_bar_estimate,
)

CALIBRATION = [
    ("zero", lambda z: np.zeros(z.shape), "psh"),
    ("real-part", lambda z: z.real, "psh"),
    ("modulus-squared", lambda z: np.abs(z) ** 2, "psh"),
    ("negative-modulus-squared", lambda z: -np.abs(z) ** 2, "not-psh"),
    ("log-distance", lambda z: np.log(np.abs(z - 2.0)), "psh"),
    ("positive-part", lambda z: np.maximum(z.real, 0.0), "psh"),
]


@pytest.mark.parametrize("resolution", [65, 129])
@pytest.mark.parametrize("name,func,verdict", CALIBRATION, ids=[c[0] for c in CALIBRATION])
def test_psh_verdict_calibration(name, func, verdict, resolution):
    domain = GridDomain.square(0j, 1.0, resolution)
    report = psh_verdict(ScalarSampleField.from_function(domain, func))
    assert report.verdict == verdict
    assert report.tolerance == pytest.approx(grid_tolerance(domain))
    assert report.nodes_tested > 0


def test_psh_report_converts_to_verification_report():
    domain = GridDomain.square(0j, 1.0, 65)
    report = psh_verdict(ScalarSampleField.from_function(domain, lambda z: -np.abs(z) ** 2))
    assert report.worst_lambda == pytest.approx(-1.0, abs=0.05)
    verification = report.to_report("conclusion", seed=3)
    assert verification.status == "fail"
    assert verification.residual == pytest.approx(-report.worst_lambda)
    assert verification.seed == 3


def test_psh_verdict_needs_room_for_a_circle():
    domain = GridDomain.square(0j, 1.0, 17)
    with pytest.raises(DomainTooSmallError):
        psh_verdict(ScalarSampleField.from_function(domain, lambda z: z.real), radii=[2.0])


def test_lambda_estimate_of_modulus_squared():
    value = lambda_estimate(lambda z: np.abs(z) ** 2, 0.3 - 0.2j, [0.1, 0.05])
    assert value == pytest.approx(1.0, abs=1e-12)


def test_lambda_estimate_rejects_undefined_center():
    with pytest.raises(InvalidCircleError):
        lambda_estimate(lambda z: np.log(np.abs(z)), 0j, [0.1])
    with pytest.raises(FieldError):
        lambda_estimate(lambda z: z.real, 0j, [])


def test_xi_xi_bar_estimate_of_squared_norm():
    def u(points):
        return np.sum(np.abs(points) ** 2, axis=-1)

    xi = np.array([1.0 + 0.5j, -0.25j])
    estimate = xi_xi_bar_estimate(u, [0.2, -0.1j], xi, disk_samples=4)
    assert estimate == pytest.approx(float(np.sum(np.abs(xi) ** 2)), abs=1e-10)
    with pytest.raises(FieldError):
        xi_xi_bar_estimate(u, [0.2, 0.1], [1.0])


def test_nested_subdomains_shrink_evenly():
    domain = GridDomain.square(0j, 0.5, 65)
    assert [sub.resolution for sub in nested_subdomains(domain)] == [51, 37, 23]


def test_max_principle_on_convex_and_concave_fields():
    domain = GridDomain.square(0j, 0.5, 65)
    sub = nested_subdomains(domain)[0]
    convex = max_principle_check(ScalarSampleField.from_function(domain, lambda z: np.abs(z) ** 2), sub)
    assert convex.passed
    assert convex.details["interior_max"] < convex.details["boundary_max"]
    concave = max_principle_check(ScalarSampleField.from_function(domain, lambda z: -np.abs(z) ** 2), sub)
    assert not concave.passed
    assert concave.witness.s == pytest.approx(0j)


def test_max_principle_rejects_misaligned_subdomain():
    domain = GridDomain.square(0j, 0.5, 65)
    u = ScalarSampleField.from_function(domain, lambda z: z.real)
    with pytest.raises(FieldError):
        max_principle_check(u, GridDomain.square(0j, 0.25, 20))
    with pytest.raises(FieldError):
        max_principle_check(u, domain)


def test_levi_form_map_is_exact_for_quadratics():
    domain = GridDomain.square(0.5j, 0.5, 33)
    levi = levi_form_map(ScalarSampleField.from_function(domain, lambda z: np.abs(z) ** 2 + z.real))
    assert_allclose(levi.values[1:-1, 1:-1], 1.0, atol=1e-9)
    assert not levi.mask[0].any()


def test_lambda_map_is_defined_on_tested_nodes():
    domain = GridDomain.square(0j, 1.0, 65)
    u = ScalarSampleField.from_function(domain, lambda z: np.abs(z) ** 2)
    report = psh_verdict(u)
    sampled = lambda_map(u, report)
    assert int(sampled.mask.sum()) == report.nodes_tested
    assert np.nanmin(sampled.values) > 0.9


def test_lambda_estimate_vanishes_for_harmonic_log_modulus():
    value = lambda_estimate(lambda z: np.log(np.abs(z)), 1.0 + 0j, [0.1, 0.2, 0.4])
    assert abs(value) < 1e-10
