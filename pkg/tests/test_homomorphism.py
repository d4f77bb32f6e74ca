import numpy as np
import pytest
from numpy.testing import assert_allclose

from hmlab.bundle import covariant_derivative, validate_metric
from hmlab.engine import build_inputs
from hmlab.errors import FieldError, ZeroVectorError
from hmlab.fields import GridDomain, MatrixPolyField, random_holomorphic_field
from hmlab.gallery import diagonal, exp_metric, flat, gallery, random_metric_field
from hmlab.homomorphism import (
    HomomorphismField,
    bound32_check,
    conclusion_check,
    cover_vectors,
    curvature_ordering_check,
    griffiths_curvature,
    hypothesis_check,
    inequality33_check,
    log_norm_field,
    metric_comparison_check,
    proof_section,
    proof_trace,
    sphere_sweep,
)

DOMAIN = GridDomain.square(0j, 0.5, 65)
SMALL = DOMAIN.with_resolution(17)


def _homomorphism(source, target, A, domain=DOMAIN):
    return HomomorphismField(A, validate_metric(source, domain), validate_metric(target, domain))


def _conformal(c, domain=DOMAIN):
    return _homomorphism(flat(1), exp_metric(c, domain), flat(1), domain)


def test_homomorphism_shape_must_match_ranks():
    with pytest.raises(FieldError):
        _homomorphism(flat(2), flat(1), flat(2), SMALL)


def test_homomorphism_must_be_holomorphic():
    A = MatrixPolyField.from_terms({(0, 1): [[1.0]]})
    with pytest.raises(FieldError):
        _homomorphism(flat(1), flat(1), A, SMALL)


def test_log_norm_of_conformal_identity():
    H = _conformal(1.0)
    log_norm = log_norm_field(H)
    points = DOMAIN.points()
    assert_allclose(log_norm.values, 0.5 * np.abs(points) ** 2, atol=1e-12)


def test_griffiths_curvature_of_scalar_weight():
    M = validate_metric(exp_metric(-1.0, SMALL), SMALL)
    assert griffiths_curvature(M, 0.1j, 1.0, [1.0]) == pytest.approx(1.0, abs=1e-9)
    assert griffiths_curvature(M, 0.1j, 2.0, [3.0 - 1j]) == pytest.approx(4.0, abs=1e-8)
    with pytest.raises(ZeroVectorError):
        griffiths_curvature(M, 0.1j, 1.0, [0.0])


@pytest.mark.parametrize("mode", ["sampled", "optimized"])
def test_hypothesis_holds_for_conformal_ordered_pair(mode):
    report = hypothesis_check(_conformal(1.0, SMALL), mode=mode)
    assert report.passed
    assert report.residual == pytest.approx(-1.0, abs=1e-8)
    assert report.details["mode"] == mode


def test_hypothesis_fails_for_anti_ordered_pair():
    report = hypothesis_check(_conformal(-1.0, SMALL))
    assert not report.passed
    assert report.status == "fail"
    assert report.residual == pytest.approx(1.0, abs=1e-8)
    assert report.witness.s is not None


def test_hypothesis_rejects_unknown_mode():
    with pytest.raises(FieldError):
        hypothesis_check(_conformal(1.0, SMALL), mode="exhaustive")


def test_hypothesis_is_vacuous_for_zero_map():
    H = _homomorphism(flat(1), exp_metric(-1.0, SMALL), MatrixPolyField.zeros(1, 1), SMALL)
    report = hypothesis_check(H)
    assert report.passed
    assert report.samples == 0
    assert report.vacuous > 0


def test_gradient_ascent_never_lowers_the_sampled_maximum():
    rng = np.random.default_rng(11)
    A = MatrixPolyField.constant(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    H = _homomorphism(random_metric_field(rng, 2), random_metric_field(rng, 2), A, SMALL)
    sampled = hypothesis_check(H, mode="sampled", seed=4)
    optimized = hypothesis_check(H, mode="optimized", seed=4)
    assert optimized.residual >= sampled.residual - 1e-12


def test_rank_two_diagonal_pair_satisfies_hypothesis():
    source = diagonal([flat(1), exp_metric(-1.0, SMALL)])
    target = diagonal([exp_metric(1.0, SMALL), exp_metric(0.5, SMALL)])
    A = MatrixPolyField.from_terms({(0, 0): [[1.0, 0.0], [0.0, 2.0]], (1, 0): [[0.0, 1.0], [0.0, 0.0]]})
    report = hypothesis_check(_homomorphism(source, target, A, SMALL))
    assert report.passed
    assert report.residual <= -0.5 + 1e-8


def test_conclusion_passes_for_conformal_ordered_pair():
    report = conclusion_check(_conformal(1.0))
    assert report.status == "pass"
    assert report.details["psh"]["verdict"] == "psh"


def test_conclusion_fails_for_anti_ordered_pair():
    report = conclusion_check(_conformal(-1.0))
    assert report.status == "fail"
    assert report.details["psh"]["worst_lambda"] == pytest.approx(-0.5, abs=0.02)


def test_conclusion_rejects_zero_map():
    H = _homomorphism(flat(1), flat(1), MatrixPolyField.zeros(1, 1), SMALL)
    with pytest.raises(FieldError):
        conclusion_check(H)


def test_curvature_ordering():
    ordered = curvature_ordering_check(validate_metric(flat(1), SMALL), validate_metric(exp_metric(1.0, SMALL), SMALL))
    assert ordered.passed
    assert ordered.details["sup_target_curvature"] == pytest.approx(-1.0, abs=1e-9)
    reversed_ = curvature_ordering_check(validate_metric(flat(1), SMALL), validate_metric(exp_metric(-1.0, SMALL), SMALL))
    assert not reversed_.passed


def test_metric_comparison_follows_curvature_order():
    low, high = validate_metric(flat(1), DOMAIN), validate_metric(exp_metric(1.0, DOMAIN), DOMAIN)
    report = metric_comparison_check(low, high)
    assert report.passed
    assert report.residual < 0
    assert metric_comparison_check(high, low).status == "not-applicable"


def test_proof_section_is_covariantly_constant_at_base_point():
    rng = np.random.default_rng(5)
    M = validate_metric(random_metric_field(rng, 2), SMALL)
    s0 = 0.1 - 0.05j
    w = np.array([1.0, 0.5j])
    phi = proof_section(M, s0, w)
    assert_allclose(phi.value(s0), w, atol=1e-14)
    assert_allclose(covariant_derivative(M, phi, s0), 0.0, atol=1e-12)
    with pytest.raises(ZeroVectorError):
        proof_section(M, s0, [0.0, 0.0])


def test_cover_vectors_are_unit():
    vectors = cover_vectors(3)
    assert len(vectors) == 3 + 3 * 4
    assert_allclose([np.linalg.norm(v) for v in vectors], 1.0)


def test_bound32_constant_is_stable_under_shrinking_radius():
    M = validate_metric(exp_metric(-1.0, DOMAIN), DOMAIN)
    report = bound32_check(M, 0.1 + 0j, trials=4)
    assert report.passed
    assert report.details["constant"] == pytest.approx(1.0, abs=0.2)


@pytest.mark.parametrize(
    "name,role",
    [
        ("berndtsson-case", "target"),
        ("rank2-diagonal", "source"),
        ("rank2-diagonal", "target"),
        ("conformal-ordered", "target"),
        ("direct-image-product", "source"),
    ],
)
def test_bound32_constant_does_not_depend_on_w(name, role):
    scenario = gallery(name)
    scenario.domain = scenario.domain.with_resolution(17)
    M = getattr(build_inputs(scenario), role)
    report = bound32_check(M, scenario.domain.center, trials=10, seed=4)
    assert report.passed, report.details
    assert report.details["w_ratio"] <= 2.0
    assert report.details["constant_per_w_max"] <= 2.0 * report.details["half_sample_constant"]


def test_bound32_sets_flat_sections_aside():
    M = validate_metric(diagonal([flat(1), exp_metric(-1.0, SMALL)]), SMALL)
    report = bound32_check(M, 0j, trials=6, seed=2, circle_nodes=32)
    assert report.details["flat_vectors"] == 1
    assert report.details["circle_nodes"] == 32
    assert report.details["constant_per_w_min"] > 0.0
    assert report.details["constant_per_w_max"] == pytest.approx(1.0, abs=0.1)


def test_mean_value_inequality_separates_ordered_and_anti_ordered_pairs():
    assert inequality33_check(_conformal(1.0), 0.1 + 0j, trials=4).passed
    anti = inequality33_check(_conformal(-1.0), 0.1 + 0j, trials=4)
    assert not anti.passed
    assert anti.residual == pytest.approx(0.5 * anti.details["radius"] ** 2, rel=0.05)


def test_proof_trace_reports_every_step():
    reports = proof_trace(_conformal(1.0), 0.05j, trials=3)
    assert set(reports) == {"bound32-source", "bound32-target", "inequality33-half", "inequality33-quarter"}
    assert all(report.passed for report in reports.values())


def _rank_two_pair(scale_source=1.0, scale_target=1.0, scale_map=1.0, domain=DOMAIN):
    source = diagonal([flat(1), exp_metric(-1.0, domain)]) * scale_source
    target = diagonal([exp_metric(1.0, domain), exp_metric(0.5, domain)]) * scale_target
    A = MatrixPolyField.from_terms({(0, 0): [[1.0, 0.0], [0.0, 2.0]], (1, 0): [[0.0, 1.0], [0.0, 0.0]]}) * scale_map
    return _homomorphism(source, target, A, domain)


def test_constant_rescaling_shifts_log_norm_and_keeps_verdicts():
    base = _rank_two_pair()
    scaled = _rank_two_pair(2.0, 5.0, 3.0)
    shift = log_norm_field(scaled).values - log_norm_field(base).values
    assert_allclose(shift, np.log(3.0 * np.sqrt(2.5)), atol=1e-10)

    hypothesis, scaled_hypothesis = hypothesis_check(base, domain=SMALL), hypothesis_check(scaled, domain=SMALL)
    assert scaled_hypothesis.status == hypothesis.status
    assert scaled_hypothesis.residual == pytest.approx(hypothesis.residual, abs=1e-8)
    assert conclusion_check(scaled).status == conclusion_check(base).status


def test_operator_norm_bounds_every_ratio_and_is_attained():
    rng = np.random.default_rng(17)
    source = validate_metric(random_metric_field(rng, 2), SMALL)
    target = validate_metric(random_metric_field(rng, 3), SMALL)
    H = HomomorphismField(random_holomorphic_field(rng, 3, 2), source, target)
    points = SMALL.points().reshape(-1)
    for s in points[rng.choice(points.size, size=6, replace=False)]:
        norm = float(H.norms(s))
        P, Pt, A = source.values(s), target.values(s), H.values(s)

        def ratio(v):
            return np.sqrt(np.vdot(A @ v, Pt @ (A @ v)).real / np.vdot(v, P @ v).real)

        for _ in range(20):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            assert ratio(v) <= norm * (1 + 1e-10) + 1e-10
        assert ratio(H.top_singular_vector(s)) == pytest.approx(norm, rel=1e-8)


def test_sphere_sweep_is_a_grid_of_unit_vectors():
    sweep = sphere_sweep()
    assert sweep.shape == (84, 2)
    assert_allclose(np.linalg.norm(sweep, axis=-1), 1.0, atol=1e-14)
    assert_allclose(sweep[0], [1.0, 0.0])
    assert_allclose(np.abs(sweep[-1]), [0.0, 1.0], atol=1e-15)


def test_rank_two_optimized_search_dominates_the_sphere_sweep():
    rng = np.random.default_rng(21)
    A = MatrixPolyField.constant(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    H = _homomorphism(random_metric_field(rng, 2), random_metric_field(rng, 2), A, SMALL)
    coarse = SMALL.with_resolution(3)
    report = hypothesis_check(H, domain=coarse, vector_samples=1, mode="optimized", iterations=0)
    swept = max(
        griffiths_curvature(H.target, s, 1.0, H.values(s) @ v) - griffiths_curvature(H.source, s, 1.0, v)
        for s in coarse.points().reshape(-1)
        for v in sphere_sweep()
    )
    assert report.details["candidates_per_node"] == 1 + 2 + 2 + 1
    assert report.residual >= swept - 1e-9
    assert hypothesis_check(H, domain=coarse, vector_samples=1, mode="sampled").details["candidates_per_node"] == 5
