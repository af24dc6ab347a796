import json
import subprocess
import sys

import numpy as np
import pytest

from triharmonic.cli import dispatch, parse_dims, read_config
from triharmonic.evolve import write_profile_csv
from triharmonic.exponents import Problem
from triharmonic.spectrum import solve_spectrum


def run(tmp_path, *argv):
    return dispatch([*argv, "--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_parse_dims():
    assert parse_dims("15..18") == [15, 16, 17, 18]
    assert parse_dims("15, 20") == [15, 20]
    assert parse_dims("20") == [20]


def test_read_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nN = 3000\nr-max-factor=4  # inline\n\n")
    assert read_config(str(cfg)) == {"N": "3000", "r_max_factor": "4"}


def test_exponents(tmp_path, capsys):
    assert run(tmp_path, "exponents", "--n", "15..20") == 0
    rows = load(tmp_path, "exponents.json")["rows"]
    assert {(r["n"], r["order"]) for r in rows} >= {(15, 6), (20, 6), (20, 2)}
    assert all(r["p_JL"] is None or r["p_JL"] > r["p_S"] for r in rows)
    out = capsys.readouterr().out
    assert "15" in out and "20" in out


def test_spectrum_degenerate(tmp_path):
    assert run(tmp_path, "spectrum", "--n", "20", "--p", "jl") == 0
    spec = load(tmp_path, "spectrum.json")["spectrum"]
    assert spec["degenerate"] is True
    assert spec["lambda3"] == spec["lambda4"]
    assert spec["lambda"][2] == spec["lambda"][3]


def test_barriers_and_verify(tmp_path):
    assert run(tmp_path, "barriers", "--n", "20", "--p", "1.5xjl") == 0
    for name in ("sub.json", "super.json", "verify_sub.json", "verify_super.json"):
        assert (tmp_path / name).exists()
    assert load(tmp_path, "verify_super.json")["passed"] is True
    assert run(tmp_path, "verify", "--barrier", str(tmp_path / "sub.json")) == 0


def test_evolve_and_certify(tmp_path):
    assert run(tmp_path, "evolve", "--n", "20", "--p", "1.5xjl", "--N", "2000") == 0
    rep = load(tmp_path, "evolve_report.json")
    assert rep["result"]["converged"] and rep["config"]["N"] == 2000
    raw = (tmp_path / "profile.csv").read_bytes()
    assert raw.startswith(b"r,u,v,w\n")
    assert run(tmp_path, "certify", "--profile", str(tmp_path / "profile.csv")) == 0
    assert load(tmp_path, "certificate.json")["ok"] is True


def test_outputs_are_byte_identical_on_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "evolve", "--N", "2000") == 0
    for name in ("profile.csv", "evolve_report.json"):
        assert (a / name).read_bytes().replace(str(a).encode(), b"") == \
            (b / name).read_bytes().replace(str(b).encode(), b"")


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 2500\nstepper = implicit\n")
    assert run(tmp_path, "evolve", "--config", str(cfg)) == 0
    assert load(tmp_path, "evolve_report.json")["grid"]["N"] == 2500
    assert run(tmp_path, "evolve", "--config", str(cfg), "--N", "2000") == 0
    assert load(tmp_path, "evolve_report.json")["grid"]["N"] == 2000


@pytest.mark.parametrize("argv", [
    ["spectrum", "--n", "10"],
    ["spectrum", "--p", "nonsense"],
    ["evolve", "--N", "10"],
    ["verify", "--barrier", "/nonexistent.json"],
    ["fit", "--profile", "/nonexistent.csv"],
    ["nosuchcommand"],
    ["evolve", "--stepper", "rk4"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert run(tmp_path, *argv) == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("flux_capacitor = 1\n")
    assert run(tmp_path, "evolve", "--config", str(cfg)) == 2


def _synthetic_profile(path, b=1.0):
    prob = Problem.parse(20, "1.5xjl", 1.0)
    spec = solve_spectrum(prob)
    r = np.linspace(0.0, 40.0, 4001)
    rr = np.where(r > 0, r, 1.0)
    u = prob.L * rr ** (-prob.m) - b * rr ** (-spec.l)
    write_profile_csv(str(path), r, np.stack([u, u, u]))


def test_fit_passes_on_expansion_profile(tmp_path):
    prof = tmp_path / "profile.csv"
    _synthetic_profile(prof)
    assert run(tmp_path, "fit", "--profile", str(prof), "--reference", "continuum") == 0
    rep = load(tmp_path, "fit_report.json")
    assert rep["passed"] and rep["fit"]["estimates"]["b"] == pytest.approx(1.0, rel=1e-6)
    assert rep["config"]["reference"] == "continuum"


def test_fit_fails_without_second_term(tmp_path):
    prof = tmp_path / "profile.csv"
    _synthetic_profile(prof, b=0.0)
    assert run(tmp_path, "fit", "--profile", str(prof), "--reference", "continuum") == 1
    assert load(tmp_path, "fit_report.json")["checks"]["b_positive"] is False


def test_fit_empty_default_window_exits_2(tmp_path, capsys):
    assert run(tmp_path, "evolve", "--N", "2000") == 0
    assert run(tmp_path, "fit", "--profile", str(tmp_path / "profile.csv")) == 2
    assert "r-max-factor" in capsys.readouterr().err


def test_certify_fails_outside_sandwich(tmp_path):
    prof = tmp_path / "profile.csv"
    r = np.linspace(0.0, 10.0, 1001)
    write_profile_csv(str(prof), r, np.full((3, r.size), 1e3))
    assert run(tmp_path, "certify", "--profile", str(prof)) == 1
    assert load(tmp_path, "certificate.json")["ok"] is False


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "triharmonic.cli", "spectrum",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "spectrum.json").exists()
