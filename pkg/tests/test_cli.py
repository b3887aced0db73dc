import json

import numpy as np
import pytest

from stfe import __version__
from stfe import io as stio
from stfe.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.delenv("STFE_OUT_DIR", raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path / "run"


def _config(path, **sections):
    path.write_text(json.dumps(sections))
    return str(path)


def test_version(capsys):
    assert main(["version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_simulate_constant_ic_rows_equal(out, tmp_path):
    cfg = _config(tmp_path / "c.json", grid={"N": 32}, sim={"T": 1e-3},
                  ic={"eps": 0.2, "density": {"preset": "constant", "c": 0.4}}, output={"dir": str(out), "diagnostics_every": 2})
    assert main(["simulate", cfg]) == EXIT_OK
    header, data = stio.read_table(out / "diagnostics.csv")
    assert header[0] == "t"
    assert np.allclose(data[:, 1:], data[0, 1:], rtol=0, atol=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["version"] == __version__ and manifest["seed"] == 0 and "config" in manifest


def test_simulate_is_deterministic(out, tmp_path):
    args = ["simulate", "--set", "grid.N=32", "--set", "ic.eps=0.2", "--set", "sim.T=5e-4", "--set", f"output.dir={out}",
            "--set", 'noise={"family": "pair", "k": 1, "lambda": 0.3}', "--set", "seed=7"]
    assert main(args) == EXIT_OK
    first = (out / "diagnostics.csv").read_bytes()
    assert main(args) == EXIT_OK
    assert (out / "diagnostics.csv").read_bytes() == first


def test_missing_config_and_bad_presets(out, tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "nope.json")]) == EXIT_CONFIG
    bad = _config(tmp_path / "b.json", noise={"family": "pair", "k": 1})
    assert main(["ensemble", bad]) == EXIT_CONFIG
    assert main(["simulate", "--set", "ic.eps=0.001"]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_writes_record(out):
    args = ["simulate", "--set", f"output.dir={out}", "--set", "sim.scheme=explicit", "--set", "sim.dt=1e-3"]
    assert main(args) == EXIT_NUMERICAL
    rec = json.loads((out / "failure.json").read_text())
    assert rec["step"] == 0 and "stability" in rec["reason"]


def test_ensemble_zero_noise_and_scaling(out, tmp_path):
    cfg = _config(tmp_path / "e.json", grid={"N": 32}, sim={"T": 1e-3}, ic={"eps": 0.2},
                  ensemble={"replicates": 4, "mass_scalings": [1, 2]}, output={"dir": str(out)})
    assert main(["ensemble", cfg, "--jobs", "1"]) == EXIT_OK
    recs = stio.read_ensemble_report(out / "ensemble.ndjson")
    assert recs and all(r["se"] == 0.0 and r["n"] == 4 for r in recs)
    lines = (out / "scaling.csv").read_text().splitlines()
    assert lines[0].split(",")[-1] == "slope_window"


def test_region(out, capsys):
    assert main(["region", "--out-dir", str(out)]) == EXIT_OK
    header, data = stio.read_table(out / "region.csv")
    assert header == ["alpha", "theta", "lhs_value", "admissible"]
    w = json.loads((out / "windows.json").read_text())
    adm = data[data[:, 3] == 1, 0]
    assert abs(adm.max() - w["alpha_theta"][1]) <= 1e-3 and abs(adm.min() - w["alpha_theta"][0]) <= 1e-3
    assert main(["region", "--n", "3.5", "--out-dir", str(out)]) == EXIT_CONFIG


def test_region_respects_env(tmp_path, monkeypatch):
    monkeypatch.setenv("STFE_OUT_DIR", str(tmp_path / "envdir"))
    monkeypatch.chdir(tmp_path)
    assert main(["region", "--resolution", "0.01"]) == EXIT_OK
    assert (tmp_path / "envdir" / "region.csv").exists()
    assert not (tmp_path / "stfe_out").exists()


def test_validate_suites(capsys):
    assert main(["validate", "exponents"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "[PASS]" in text and "[FAIL]" not in text
    assert main(["validate", "nonsense"]) == EXIT_CONFIG
