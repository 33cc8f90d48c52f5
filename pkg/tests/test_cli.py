import json
from pathlib import Path

import numpy as np
import pytest

from app.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_NONCONVERGENCE, EXIT_OK, main
from app.core.serialization import canonical_json
from app.geometry.field_io import read_field

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_PROBLEM = {
    "operator": {"kind": "SigmaRoot", "k": 2, "n": 2},
    "grid": {"lower": [0.0, 0.0], "upper": [1.0, 1.0], "shape": [9, 9]},
    "psi": "1",
    "phi": "(x**2 + y**2)/2",
    "ubar": "x**2 + y**2 - 1.5",
    "exact": "(x**2 + y**2)/2",
}


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(SMALL_PROBLEM))
    return path


def test_verify_cone_passes(tmp_path):
    out = tmp_path / "cone.json"
    code = main(["verify-cone", "--spec", str(CONFIGS / "sigma_root_2_3.json"), "--mu", "1.4,1.5,1.11",
                 "--samples", "200", "--out", str(out)])
    assert code == EXIT_OK
    results = json.loads(out.read_text())
    assert results[0]["verdict"] == "pass"
    assert results[0]["R_used"] == 10.0


def test_verify_cone_radius_scan(tmp_path):
    out = tmp_path / "cone.json"
    code = main(["verify-cone", "--spec", str(CONFIGS / "sigma_root_2_3.json"), "--mu", "2,2,2",
                 "--radii", "10,20,40", "--samples", "64", "--out", str(out)])
    assert code == EXIT_OK
    assert [r["R_used"] for r in json.loads(out.read_text())] == [10.0, 20.0, 40.0]


def test_concavity_failure_exits_with_one(tmp_path, capsys):
    out = tmp_path / "certs.json"
    code = main(["verify-operator", "--spec", str(CONFIGS / "sigma_2_3.json"), "--conditions", "1.5",
                 "--samples", "64", "--out", str(out)])
    assert code == EXIT_FAIL
    certs = json.loads(out.read_text())
    assert certs[0]["condition"] == "Concave_1_5"
    assert certs[0]["verdict"] == "fail"
    assert certs[0]["details"]["max_hessian_eigenvalue"] == pytest.approx(2.0)
    assert "FAIL Concave_1_5" in capsys.readouterr().out


def test_inline_spec_and_canonical_output(tmp_path):
    out = tmp_path / "certs.json"
    argv = ["verify-operator", "--spec", '{"kind": "SigmaRoot", "k": 3, "n": 3}', "--conditions", "1.4,1.12",
            "--samples", "32", "--out", str(out)]
    assert main(argv) == EXIT_OK
    first = out.read_bytes()
    certs = json.loads(first)
    assert certs[1]["margin"] == float("inf")
    assert main(argv) == EXIT_OK
    assert out.read_bytes() == first


def test_run_config_file_with_flag_override(tmp_path):
    config = tmp_path / "run.json"
    out = tmp_path / "certs.json"
    config.write_text(json.dumps({
        "command": "verify-operator",
        "spec": str(CONFIGS / "sigma_root_2_3.json"),
        "conditions": ["1.4"],
        "samples": 5000,
    }))
    assert main(["--config", str(config), "--samples", "16", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())[0]["n_samples"] == 16


@pytest.mark.parametrize("content", ["", "   \n", "{not json", "[1, 2]", '{"command": "verify-operator", "samples": "many"}'])
def test_bad_config_files_exit_with_two(tmp_path, content):
    config = tmp_path / "run.json"
    config.write_text(content)
    assert main(["--config", str(config)]) == EXIT_CONFIG


def test_missing_inputs_exit_with_two(tmp_path):
    assert main([]) == EXIT_CONFIG
    assert main(["--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["verify-operator"]) == EXIT_CONFIG
    assert main(["verify-operator", "--spec", str(CONFIGS / "sigma_root_2_3.json"), "--conditions", "9.9"]) == EXIT_CONFIG
    assert main(["verify-cone", "--spec", str(CONFIGS / "sigma_root_2_3.json")]) == EXIT_CONFIG


def test_solve_writes_report_field_csv_and_pdf(tmp_path, problem_file):
    out, field, table, pdf = (tmp_path / name for name in ("report.json", "u.field", "u.csv", "report.pdf"))
    code = main(["solve", "--problem", str(problem_file), "--out", str(out), "--field", str(field),
                 "--csv", str(table), "--pdf", str(pdf)])
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["converged"]
    assert report["error_inf"] < 1e-8
    header, u = read_field(field)
    assert header["shape"] == [9, 9]
    x, y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9), indexing="ij")
    np.testing.assert_allclose(u, (x**2 + y**2) / 2, atol=1e-8)
    assert table.read_text().splitlines()[0] == "x,y,u,ubar,psi,error"
    assert pdf.read_bytes().startswith(b"%PDF")


def test_nonconvergence_exits_with_three_and_keeps_a_snapshot(tmp_path, problem_file):
    out = tmp_path / "report.json"
    code = main(["solve", "--problem", str(problem_file), "--max-iters", "0", "--out", str(out)])
    assert code == EXIT_NONCONVERGENCE
    snapshot = np.load(f"{out}.snapshot.npz")
    assert float(snapshot["t"]) == 0.0
    assert snapshot["u"].shape == (9, 9)


def test_infeasible_problem_exits_with_two(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(dict(SMALL_PROBLEM, psi="x - 0.5")))
    assert main(["solve", "--problem", str(path)]) == EXIT_CONFIG


def test_sweep_writes_the_table(tmp_path, problem_file):
    table = tmp_path / "sweep.csv"
    out = tmp_path / "sweep.json"
    code = main(["sweep", "--problem", str(problem_file), "--range", "0:1:3", "--csv", str(table), "--out", str(out)])
    assert code == EXIT_OK
    lines = table.read_text().splitlines()
    assert lines[0] == "s,max_hess_interior,max_hess_boundary,max_grad,residual,iters"
    assert len(lines) == 4
    assert json.loads(out.read_text())["empirical_C1"] > 0


def test_subsolution_and_barrier_commands(tmp_path, problem_file):
    assert main(["verify-subsolution", "--problem", str(problem_file)]) == EXIT_OK
    out = tmp_path / "barrier.json"
    assert main(["barrier-check", "--problem", str(problem_file), "--search", "--out", str(out)]) == EXIT_OK
    cert = json.loads(out.read_text())
    assert cert["details"]["part_a"]["passed"]
    assert cert["details"]["part_b"]["passed"]


def test_canonical_json_sorts_keys_and_fixes_float_digits():
    text = canonical_json({"b": 0.1, "a": [1, float("inf")], "c": {"z": True, "y": None}})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert text.index('"y"') < text.index('"z"')
    assert "0.10000000000000001" in text
    assert "Infinity" in text
    assert canonical_json({"c": 1, "a": 2}) == canonical_json({"a": 2, "c": 1})
