import csv
import json
from pathlib import Path

import pytest

from hmlab.bundle import self_adjoint_residual
from hmlab.engine import (
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    build_inputs,
    exit_status,
    falsify,
    resolve_fields,
    run_scenario,
    truncation_study,
    write_map,
)
from hmlab.errors import FieldError, ScenarioError, UnknownGalleryEntryError
from hmlab.fields import GridDomain
from hmlab.gallery import gallery, gallery_entry, gallery_names
from hmlab.reports import VerificationReport
from hmlab.scenario import Scenario, load_scenario, save_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(autouse=True)
def _quiet(monkeypatch):
    monkeypatch.setenv("HM_NO_PROGRESS", "1")


def _coarse(name, resolution=33):
    scenario = gallery(name)
    scenario.domain = scenario.domain.with_resolution(resolution)
    return scenario


@pytest.mark.parametrize(
    "payload,message",
    [
        ({"checks": ["validate"]}, "missing required key"),
        ({"name": "x", "checks": []}, "declares no checks"),
        ({"name": "x", "checks": ["teleport"]}, "Unknown check"),
        ({"name": "x", "checks": ["hypothesis"], "source": "identity"}, "needs target, homomorphism"),
        ({"name": "x", "checks": ["validate"], "source": "identity", "maps": ["heat"]}, "Unknown map"),
        (
            {"name": "x", "checks": ["validate"], "source": "identity", "tolerances": {"hypothesis_mode": "brute"}},
            "hypothesis mode",
        ),
        (
            {"name": "x", "checks": ["validate"], "source": "identity", "tolerances": {"circle_nodes": 8}},
            "circle_nodes",
        ),
    ],
)
def test_scenario_schema_errors(payload, message):
    with pytest.raises(ScenarioError, match=message):
        Scenario.from_dict(payload)


def test_load_scenario_reports_bad_files(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_scenario(broken)


def test_scenario_file_round_trip(tmp_path):
    scenario = gallery("conformal-ordered")
    path = tmp_path / "conformal.json"
    save_scenario(scenario, path)
    assert load_scenario(path).to_dict() == scenario.to_dict()


def test_gallery_lists_every_entry():
    names = gallery_names()
    assert {"flat-identity", "conformal-ordered", "anti-ordered", "lp-example", "truncation-study"} <= set(names)
    assert gallery_entry("anti-ordered").expected["hypothesis"] == "fail"
    with pytest.raises(UnknownGalleryEntryError) as info:
        gallery("nope")
    assert info.value.available == names
    assert "flat-identity" in str(info.value)


def test_identity_rank_is_inferred_from_other_fields():
    scenario = load_scenario(SCENARIOS / "polynomial_pair.json")
    fields = resolve_fields(scenario)
    assert fields["source"].shape == (1, 1)
    assert fields["target"].evaluate(1.0 + 0j)[0, 0] == pytest.approx(2.0)


def test_identity_without_rank_is_a_scenario_error():
    scenario = Scenario(name="lonely", domain=GridDomain.square(0j, 0.5, 17), checks=["validate"], source="identity")
    with pytest.raises(ScenarioError):
        resolve_fields(scenario)


def test_gallery_references_resolve():
    scenario = load_scenario(SCENARIOS / "conformal_ordered.json")
    inputs = build_inputs(scenario)
    assert inputs.homomorphism is not None
    assert inputs.target.rank == 1


def test_exit_status_precedence():
    passing = VerificationReport("a", residual=0.0, tolerance=1.0)
    failing = VerificationReport("b", residual=2.0, tolerance=1.0)
    unsure = VerificationReport("c", residual=0.0, tolerance=1.0, status="inconclusive")
    skipped = VerificationReport.not_applicable("d", "nothing to do")
    assert exit_status([passing, skipped]) == EXIT_PASS
    assert exit_status([passing, unsure]) == EXIT_INCONCLUSIVE
    assert exit_status([unsure, failing]) == EXIT_FAIL


def test_run_flat_identity_writes_report_bundle(tmp_path):
    status, reports = run_scenario(_coarse("flat-identity"), out=tmp_path)
    assert status == EXIT_PASS
    assert all(r.status == "pass" for r in reports)
    out = tmp_path / "flat-identity"
    for name in ("summary.json", "metadata.json", "validate.json", "hypothesis.json", "curvature_source.csv", "norm.csv"):
        assert (out / name).is_file(), name
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["exit_status"] == 0
    assert summary["prng"] == "PCG64"
    assert summary["expected_mismatches"] == {}
    assert "timestamp" not in summary


def test_run_anti_ordered_fails_as_expected(tmp_path):
    status, reports = run_scenario(_coarse("anti-ordered"), out=tmp_path)
    assert status == EXIT_FAIL
    by_check = {r.check: r.status for r in reports}
    assert by_check == {"validate": "pass", "hypothesis": "fail", "conclusion": "fail", "max-principle": "fail"}


def test_run_is_deterministic(tmp_path):
    run_scenario(_coarse("anti-ordered"), out=tmp_path / "first", seed=5)
    run_scenario(_coarse("anti-ordered"), out=tmp_path / "second", seed=5)
    first = (tmp_path / "first" / "anti-ordered" / "summary.json").read_bytes()
    second = (tmp_path / "second" / "anti-ordered" / "summary.json").read_bytes()
    assert first == second


def test_indefinite_metric_becomes_failed_validation(tmp_path):
    payload = {
        "name": "indefinite",
        "domain": {"half_widths": [0.5, 0.5], "resolution": 17},
        "checks": ["validate"],
        "source": {"rows": 1, "cols": 1, "coeffs": [{"j": 0, "k": 0, "matrix": [[1.0]]}, {"j": 1, "k": 1, "matrix": [[-4.0]]}]},
    }
    status, reports = run_scenario(Scenario.from_dict(payload), out=tmp_path)
    assert status == EXIT_FAIL
    assert reports[0].check == "validate"
    assert reports[0].witness.s is not None


def test_lp_scenario_file_passes(tmp_path):
    status, reports = run_scenario(SCENARIOS / "lp_cubic.json", out=tmp_path)
    assert status == EXIT_PASS
    stationarity = next(r for r in reports if r.check == "lp-stationarity")
    assert stationarity.details["printed_residual"] > stationarity.residual


def test_write_levi_map(tmp_path):
    paths = write_map("levi", _coarse("conformal-ordered", 17), tmp_path)
    assert [p.name for p in paths] == ["levi.csv"]
    with paths[0].open(encoding="utf-8") as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ["re", "im", "levi"]
    assert len(rows) == 1 + 17 * 17
    center = rows[1 + 8 * 17 + 8]
    assert float(center[2]) == pytest.approx(0.5, abs=1e-6)


def test_map_needs_a_homomorphism(tmp_path):
    scenario = Scenario(
        name="metric-only", domain=GridDomain.square(0j, 0.5, 17), checks=["validate"], source={"identity": 2}
    )
    with pytest.raises(ScenarioError):
        write_map("norm", scenario, tmp_path)


def test_truncation_study_is_stable():
    report = truncation_study(GridDomain.square(0j, 0.5, 33), ranks=(2, 4))
    assert report.status == "pass"
    assert [row["rank"] for row in report.details["ranks"]] == [2, 4]
    assert all(row["verdict"] == "psh" for row in report.details["ranks"])


def test_falsify_with_no_trials():
    summary = falsify(0)
    assert summary["trials"] == 0
    assert summary["min_levi"] is None
    assert summary["counterexamples"] == []
    with pytest.raises(FieldError):
        falsify(-1)


def test_falsify_is_seeded_and_finds_nothing(tmp_path):
    first = falsify(3, seed=1, resolution=33, out=tmp_path)
    second = falsify(3, seed=1, resolution=33)
    assert first == second
    assert first["kinds"] == {"conformal": 1, "ordered-pair": 1, "random-pair": 1}
    assert first["hypothesis_passed"] >= 2
    assert first["counterexamples"] == []
    assert (tmp_path / "falsify_summary.json").is_file()


@pytest.mark.parametrize("name", gallery_names())
def test_gallery_entry_meets_its_expected_statuses(name, tmp_path):
    run_scenario(gallery(name), out=tmp_path)
    summary = json.loads((tmp_path / name / "summary.json").read_text(encoding="utf-8"))
    assert summary["expected_mismatches"] == {}


@pytest.mark.parametrize("name", gallery_names())
def test_gallery_curvature_is_self_adjoint_at_every_node(name):
    for role, M in build_inputs(_coarse(name, 17)).metrics():
        assert self_adjoint_residual(M).max() < 1e-8, role


def test_circle_nodes_reach_every_circle_average(tmp_path):
    scenario = _coarse("conformal-ordered")
    scenario.tolerances.circle_nodes = 32
    _, reports = run_scenario(scenario, out=tmp_path)
    by_check = {r.check: r for r in reports}
    assert by_check["conclusion"].details["psh"]["circle_nodes"] == 32
    assert by_check["proof-trace"].details["bound32-source"]["details"]["circle_nodes"] == 32
    assert by_check["proof-trace"].details["bound32-target"]["details"]["circle_nodes"] == 32


def test_falsify_covers_every_kind_without_counterexamples():
    summary = falsify(6, seed=2, resolution=33)
    assert summary["trials"] == 6
    assert summary["kinds"] == {"conformal": 2, "ordered-pair": 2, "random-pair": 2}
    assert summary["counterexamples"] == []
