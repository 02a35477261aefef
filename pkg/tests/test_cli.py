import json
import subprocess
import sys

import numpy as np
import pytest

from splinedeconv.cli import main
from splinedeconv.sequences import WeightedSequence, load_sequence, save_sequence


@pytest.fixture
def files(tmp_path):
    save_sequence(WeightedSequence.delta(1), tmp_path / "delta.json")
    save_sequence(WeightedSequence.from_1d([1 / 6, 2 / 3, 1 / 6], -1), tmp_path / "hat_a.json")
    save_sequence(WeightedSequence.from_1d([1.0, -1.0], 0), tmp_path / "diff.json")
    for name, spec in {
        "hat": {"kind": "bspline", "order": 2},
        "box": {"kind": "bspline", "order": 1},
        "exp": {"kind": "exp", "rate": 1.0},
    }.items():
        (tmp_path / f"{name}.json").write_text(json.dumps(spec))
    return tmp_path


def run(tmp_path, *args):
    return main(["--out-dir", str(tmp_path / "out"), *map(str, args)])


def _reports(path):
    return {r["name"]: r for r in json.loads(path.read_text())["reports"]}


def test_deconvolve_delta(files):
    assert run(files, "deconvolve", files / "delta.json") == 0
    out = files / "out"
    b = load_sequence(out / "b.json")
    assert b.shape == (1,) and b[0] == 1
    rep = _reports(out / "bounds.json")
    assert rep["one_dim"]["value"] == {"M12_b": 0.0, "l1_b": 1.0}
    assert rep["certified_range"]["value"] == [1.0, 1.0]
    assert (out / "b_abs.csv").read_text().splitlines() == ["k,abs", "0,1.0"]


def test_deconvolve_hat_matches_model(files):
    from splinedeconv.spline import bspline, build_model

    assert run(files, "deconvolve", files / "hat_a.json", "--trunc-tol", "1e-13") == 0
    b = load_sequence(files / "out" / "b.json")
    model = build_model(bspline(2))
    assert b.allclose(model.b, atol=1e-14)
    rep = _reports(files / "out" / "bounds.json")
    assert rep["certified_range"]["value"][0] == pytest.approx(model.A_gram)
    assert rep["one_dim_actual"]["value"]["l1_b"] <= rep["one_dim"]["value"]["l1_b"]


def test_deconvolve_not_invertible_json_error(files, capsys):
    code = main(["--json-errors", "--out-dir", str(files / "out"), "deconvolve", str(files / "diff.json")])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "NotInvertible" and err["exit_code"] == 2


def test_missing_file_is_io_error(files):
    assert run(files, "deconvolve", files / "nope.json") == 4


def test_bounds_table(files, capsys):
    assert run(files, "bounds", "--alpha", 2, "--C", 1, "--deriv-norm", 2, "--A", 0.5) == 0
    vals = json.loads((files / "out" / "bounds.json").read_text())["values"]
    assert vals["K_alpha (certified)"] == 10.0
    assert vals["rho(delta*)"] <= 0.9
    assert "delta*" in capsys.readouterr().out


def test_dual_window_box_and_hat(files):
    assert run(files, "dual-window", files / "box.json") == 0
    rep = json.loads((files / "out" / "dual_window.json").read_text())
    assert rep["biorthogonality_defect"] == 0.0
    assert load_sequence(files / "out" / "psi_coefficients.json").values.tolist() == [1.0]
    assert run(files, "dual-window", files / "hat.json") == 0
    rep = json.loads((files / "out" / "dual_window.json").read_text())
    assert rep["biorthogonality_defect"] <= 1e-8
    assert rep["psi_W_numeric"] <= rep["psi_W_certified"]


def test_riesz_check(files):
    assert run(files, "riesz-check", files / "hat.json", "--trials", 10, "--p", 2, "inf") == 0
    rep = json.loads((files / "out" / "riesz.json").read_text())
    assert rep["inside_certified"] is True
    assert set(rep["ratios"]) == {"2.0", "inf"}


def test_sample_recon_integer_points(files):
    np.savetxt(files / "pts.csv", np.arange(0.0, 17.0), fmt="%.17g")
    assert run(files, "sample-recon", files / "hat.json", "--points", files / "pts.csv", "--delta", 0.6,
               "--window", 0, 16) == 0
    rep = json.loads((files / "out" / "recon.json").read_text())
    for key in ("iterations", "error_history", "rho_certified", "gamma_observed", "c_p", "C_p", "violations"):
        assert key in rep
    assert rep["max_coefficient_error"] < 1e-10
    assert rep["c_p"] is None  # not certified at this density
    rows = (files / "out" / "error_history.csv").read_text().splitlines()
    assert rows[0] == "iteration,step_norm" and len(rows) == rep["iterations"] + 1


def test_sample_recon_streamed(files):
    assert run(files, "sample-recon", files / "hat.json", "--window-length", 3, "--seed", 5) == 0
    rep = json.loads((files / "out" / "recon.json").read_text())
    assert rep["rho_certified"] <= 0.9 and rep["violations"] == 0
    assert rep["c_p"] < rep["C_p"]
    assert rep["max_coefficient_error"] < 1e-8
    assert rep["seed"] == 5


def test_sample_recon_empty_set(files):
    (files / "empty.csv").write_text("")
    assert run(files, "sample-recon", files / "hat.json", "--points", files / "empty.csv", "--delta", 0.5) == 2


def test_outputs_are_deterministic(files):
    outs = []
    for k in range(2):
        d = files / f"run{k}"
        assert main(["--out-dir", str(d), "--seed", "3", "riesz-check", str(files / "hat.json"), "--trials", "5"]) == 0
        outs.append((d / "riesz.json").read_bytes())
    assert outs[0] == outs[1]


def test_verify_bad_config(files):
    (files / "cfg.json").write_text(json.dumps({"oracle_tol": -1e-8}))
    assert run(files, "verify", "--config", files / "cfg.json") == 2
    (files / "cfg.json").write_text(json.dumps({"no_such_key": 1}))
    assert run(files, "verify", "--config", files / "cfg.json") == 2


def test_verify_subset(files, capsys):
    assert run(files, "verify", "--criteria", 5, 6) == 0
    out = capsys.readouterr().out
    assert "criterion  5 PASS" in out and "criterion 10 PASS" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "splinedeconv", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "sample-recon" in r.stdout
