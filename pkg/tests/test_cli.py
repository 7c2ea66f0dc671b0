import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from moebius_modules.cli import decay_levels, main
from moebius_modules.numerics import matrix_from_json, matrix_to_json
from moebius_modules.scenario import load_scenario, resolve_path, resolve_tol


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--report", str(out)])
    doc = json.loads(out.read_text()) if out.exists() else None
    return code, doc


def strip_times(obj):
    if isinstance(obj, dict):
        return {k: strip_times(v) for k, v in obj.items() if k != "wall_time_s"}
    if isinstance(obj, list):
        return [strip_times(v) for v in obj]
    return obj


def failing(doc):
    return [c["name"] for c in doc["checks"] if not c["passed"]]


@pytest.mark.parametrize("name", ["scalar_moebius.json", "orbit_dim2.json", "polarized_dim2.json",
                                  "transform_m2.json"])
def test_verify_bundled_scenarios_pass(tmp_path, name):
    code, doc = run(tmp_path, "verify", name)
    assert code == 0 and doc["passed"]


def test_verify_bad_F_names_invariant(tmp_path):
    code, doc = run(tmp_path, "verify", "bad_F.json")
    assert code == 1
    assert failing(doc) == ["fredholm.F_selfadjoint"]


def test_verify_noncommutant(tmp_path):
    code, doc = run(tmp_path, "verify", "noncommutant.json")
    assert code == 1
    assert "NotInCommutant" in doc["errors"]["action"]


def test_malformed_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", str(bad)]) == 2


def test_schema_violation_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"fredholm": {"pi": [], "F": {"rows": 2, "cols": 2, "data": [[1, 0]]}}}))
    assert main(["verify", str(bad)]) == 2
    bad.write_text(json.dumps({"unknown": 1}))
    assert main(["verify", str(bad)]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


def test_dimension_mismatch_exits_2(tmp_path):
    doc = {"fredholm": {"pi": [matrix_to_json(np.eye(3))], "F": matrix_to_json(np.eye(2))}}
    p = tmp_path / "mismatch.json"
    p.write_text(json.dumps(doc))
    assert main(["verify", str(p)]) == 2


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    _, d1 = run(a, "verify", "transform_m2.json", "--seed", "3")
    _, d2 = run(b, "verify", "transform_m2.json", "--seed", "3")
    assert json.dumps(strip_times(d1), sort_keys=True) == json.dumps(strip_times(d2), sort_keys=True)


def test_orbit_dim2_matches_example(tmp_path):
    code, doc = run(tmp_path, "orbit", "orbit_dim2.json", "--steps", "8")
    assert code == 0
    F = matrix_from_json(doc["orbit"]["F"])
    assert np.round(F.real, 4) == pytest.approx(np.array([[-0.5, 0.866], [0.866, 0.5]]))
    assert len(doc["homotopy"]["t"]) == 9
    u = matrix_from_json(doc["polar"]["left"]["u"])
    assert np.allclose(u, np.eye(2))


def test_orbit_identity_is_input(tmp_path):
    sx = matrix_to_json(np.array([[0, 1.0], [1.0, 0]]))
    doc = {"moebius": {"a": matrix_to_json(np.eye(2)), "b": matrix_to_json(np.zeros((2, 2)))},
           "fredholm": {"pi": [matrix_to_json(np.eye(2))], "F": sx}}
    p = tmp_path / "identity.json"
    p.write_text(json.dumps(doc))
    code, rep = run(tmp_path, "orbit", str(p))
    assert code == 0
    assert rep["orbit"]["F"] == sx


def test_orbit_noncommutant_exits_1(tmp_path):
    code, doc = run(tmp_path, "orbit", "noncommutant.json")
    assert code == 1
    assert "NotInCommutant" in doc["errors"]["orbit"]


def test_orbit_requires_both_parts(tmp_path):
    assert main(["orbit", "bad_F.json"]) == 2


def test_sphere_round(tmp_path):
    csv_path = tmp_path / "decay.csv"
    code, doc = run(tmp_path, "sphere", "--lmax", "6", "--decay", str(csv_path))
    assert code == 0
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["lmax", "f_l", "f_m", "comm_norm"]
    assert [int(r["lmax"]) for r in rows] == decay_levels(6)


def test_sphere_conformal_metric(tmp_path):
    metric = str(resolve_path("metric_conformal.json"))
    code, doc = run(tmp_path, "sphere", "--lmax", "6", "--metric", metric)
    assert code == 0
    delta = {c["name"]: c["residual"] for c in doc["checks"]}["lift.gamma_conformal_delta"]
    assert delta < 1e-7


def test_sphere_tensor_metric(tmp_path):
    metric = str(resolve_path("metric_tensor.json"))
    code, doc = run(tmp_path, "sphere", "--lmax", "6", "--metric", metric)
    assert code == 0
    assert doc["diagnostics"]["lift.gamma_conformal_delta"] > 1e-3


def test_sphere_lmax_one_single_row(tmp_path):
    csv_path = tmp_path / "decay.csv"
    code, _ = run(tmp_path, "sphere", "--lmax", "1", "--func-lmax", "1", "--decay", str(csv_path))
    assert code == 0
    assert len(csv_path.read_text().strip().splitlines()) == 2


def test_sphere_bad_arguments(tmp_path):
    assert main(["sphere", "--lmax", "0"]) == 2
    assert main(["sphere", "--lmax", "3", "--func-lmax", "4"]) == 2
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"type": "hyperbolic"}))
    assert main(["sphere", "--metric", str(bad)]) == 2


def test_unknown_subcommand_exits_2():
    assert main(["frobnicate"]) == 2


def test_tolerance_precedence(monkeypatch):
    monkeypatch.setenv("MOEBIUS_TOL", "1e-7")
    assert resolve_tol(1e-5, 1e-6) == 1e-5
    assert resolve_tol(None, 1e-6) == 1e-6
    assert resolve_tol(None, None) == 1e-7
    monkeypatch.delenv("MOEBIUS_TOL")
    assert resolve_tol(None, None, 1e-9) == 1e-9


def test_env_tolerance_reaches_report(tmp_path, monkeypatch):
    monkeypatch.setenv("MOEBIUS_TOL", "1e-6")
    _, doc = run(tmp_path, "verify", "bad_F.json")
    assert doc["parameters"]["tol"] == 1e-6


def test_matrix_json_is_bit_exact_through_cli(tmp_path, rng):
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    doc = {"fredholm": {"pi": [matrix_to_json(np.eye(2))], "F": matrix_to_json(np.diag([1.0, -1.0]))},
           "moebius": {"x": matrix_to_json(np.eye(2) * 2)}, "involution": matrix_to_json(np.eye(2)),
           "transform": {"a": matrix_to_json(M), "b": matrix_to_json(np.zeros((2, 2)))}}
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    sc = load_scenario(p)
    assert np.array_equal(sc.transform.a, M)


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "moebius_modules.cli", "verify", "scalar_moebius.json",
                          "--report", str(tmp_path / "r.json")], capture_output=True, text=True)
    assert res.returncode == 0
    assert "PASS" in res.stderr
