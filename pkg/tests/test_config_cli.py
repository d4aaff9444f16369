import csv
import json
import subprocess
import sys

import numpy as np
import pytest

import bdcert as b
from bdcert import cli
from bdcert.config import model_from_config, model_to_config


def run_cli(args, out):
    return cli.main([*args, "--out", str(out)])


def test_model_config_roundtrip(example1):
    m = example1.model
    again = model_from_config(model_to_config(m))
    ts = np.linspace(0, 1, 41)
    assert np.allclose(m.beta_floor_fn()(ts), again.beta_floor_fn()(ts))
    assert again.L_bound() == m.L_bound()
    for t in (0.0, 0.33):
        A = b.build_generator(m, 10, t, "shifted").to_dense()
        C = b.build_generator(again, 10, t, "shifted").to_dense()
        assert np.abs(A - C).max() == 0.0


@pytest.mark.parametrize("name", ["example1", "example2", "example3",
                                  "example4"])
def test_roundtrip_reproduces_bound_reports(name):
    p = b.get_preset(name)
    again = model_from_config(model_to_config(p.model))
    r1 = b.ergodicity_report(p.model, p.weights, grid=256)
    r2 = b.ergodicity_report(again, p.weights, grid=256)
    assert r1.to_dict() == r2.to_dict()


def test_save_and_load(tmp_path, example2):
    path = tmp_path / "model.json"
    b.save_model(example2.model, path)
    loaded = b.load_model(path)
    assert loaded.name == "example2"
    assert loaded.bulk.rule.exponent == 10.0


def test_bad_configs_raise():
    with pytest.raises(b.ModelValidationError):
        model_from_config({"period": 1.0})
    with pytest.raises(b.ModelValidationError):
        model_from_config({
            "period": 1.0,
            "birth": {"base": {"kind": "nope"}, "rule": {"kind": "shared"}},
            "death": {}, "exodus": {}, "bulk_arrival": {}})


def test_cli_bounds_unit_weights_collapse(tmp_path, example1):
    # with d = 1 the weighted contraction column equals the floor column
    assert run_cli(["bounds", "--preset", "example1", "--weights", "ones",
                    "--no-plot"], tmp_path) == 0
    with open(tmp_path / "contraction_rates.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows
    for row in rows:
        assert float(row["weighted_contraction"]) == pytest.approx(
            float(row["beta_floor"]), abs=1e-9)
    report = json.loads((tmp_path / "ergodicity.json").read_text())
    assert report["weighted"]["rule"] == "ones"


def test_cli_truncate_example4(tmp_path):
    code = run_cli(["truncate", "--preset", "example4", "--target", "1e-5"],
                   tmp_path)
    assert code == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["level"] <= 220
    assert cert["min_window_start"] <= 57.0
    assert (tmp_path / "certificate.txt").exists()


def test_cli_truncate_paper_constants(tmp_path):
    code = run_cli(["truncate", "--preset", "example1", "--target", "1e-5",
                    "--paper-constants", "--window", "10:11"], tmp_path)
    assert code == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["mode"] == "pinned"
    assert cert["constants"]["a1"] == 1.5


def test_cli_regime_example1(tmp_path):
    code = run_cli(["regime", "--preset", "example1", "--target", "1e-5",
                    "--S", "3"], tmp_path)
    assert code == 0
    meta = json.loads((tmp_path / "regime_meta.json").read_text())
    assert meta["certificate"]["level"] <= 30
    with open(tmp_path / "regime.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 101
    assert set(rows[0]) == {"t", "p0", "p_le_3", "mean", "tv_bound",
                            "mean_bound"}
    for key in ("regime_p0", "regime_p_le_3", "regime_mean"):
        png = tmp_path / f"{key}.png"
        assert png.exists() and png.stat().st_size > 0


def test_cli_solve(tmp_path):
    code = run_cli(["solve", "--preset", "example1", "--N", "20",
                    "--t1", "1.0"], tmp_path)
    assert code == 0
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["p0"]) == 1.0
    meta = json.loads((tmp_path / "trajectory_meta.json").read_text())
    assert meta["error_estimate"] < 1e-8


def test_cli_simulate(tmp_path):
    code = run_cli(["simulate", "--preset", "example1", "--paths", "500",
                    "--seed", "4", "--times", "0.5,1.0", "--majorant",
                    "10.5"], tmp_path)
    assert code == 0
    with open(tmp_path / "simulation.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6  # 2 times x 3 observables
    assert {r["observable"] for r in rows} == {"p0", "p_le_3", "mean"}


def test_cli_report_flags_discrepancy(tmp_path):
    code = run_cli(["report", "--preset", "example1"], tmp_path)
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    disc = rep["weighted_rate_discrepancy"]
    assert disc["published_exceeds_computed"] is True
    assert disc["max_gap"] > 0
    text = (tmp_path / "report.txt").read_text()
    assert "comparison only" in text
    assert (tmp_path / "weighted_rate.png").exists()


def test_cli_error_json(tmp_path, capsys):
    code = run_cli(["bounds", "--preset", "nope"], tmp_path)
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ModelValidationError"


def test_cli_entry_point_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bdcert.cli", "truncate", "--preset",
         "example1", "--target", "1e-4", "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "truncation certificate" in proc.stdout


def test_cli_env_var_output(tmp_path, monkeypatch):
    monkeypatch.setenv("BDCERT_OUT", str(tmp_path / "envout"))
    assert cli.main(["bounds", "--preset", "example1", "--no-plot"]) == 0
    assert (tmp_path / "envout" / "ergodicity.json").exists()
