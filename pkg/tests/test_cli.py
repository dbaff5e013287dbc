"""End-to-end CLI runs: files, manifests, replay, exit codes."""

import csv
import hashlib
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import sedlab
from sedlab.field import exact_autocorrelation


def run_cli(*args, expect=0):
    env = dict(os.environ, SED_LAB_THREADS="1",
               MPLCONFIGDIR="/tmp/mplcache")
    proc = subprocess.run([sys.executable, "-m", "sedlab.cli", *map(str, args)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == expect, (proc.stdout, proc.stderr)
    return proc


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_rates_kappa_grid(tmp_path):
    out = tmp_path / "rates"
    proc = run_cli("rates", "--kappa-grid", "0:1:11", "--out", out)
    assert proc.stdout.count("wrote ") == 3
    header, rows = read_csv(out / "rates.csv")
    assert header == ["kappa", "f", "gain", "loss", "total"]
    assert len(rows) == 11
    assert rows[0][0] == 0.0 and rows[-1][0] == 1.0
    fvals = [r[1] for r in rows]
    assert all(a > b for a, b in zip(fvals, fvals[1:]))
    assert fvals[-1] == pytest.approx(0.5, abs=1e-12)
    assert math.isinf(rows[0][2])
    for r in rows[1:]:
        assert r[4] == pytest.approx(r[2] + r[3], rel=1e-12)
    raw = (out / "rates.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    assert (out / "rates.png").read_bytes()[:4] == b"\x89PNG"


def test_manifest_digests(tmp_path):
    out = tmp_path / "m"
    run_cli("rates", "--kappa", "0.8", "--out", out)
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["command"] == "rates"
    assert doc["code_version"] == sedlab.__version__
    assert doc["seeds"] == []
    assert {o["path"] for o in doc["outputs"]} == {"rates.csv", "rates.png"}
    for entry in doc["outputs"]:
        assert digest(out / entry["path"]) == entry["sha256"]


def test_gmu_values(tmp_path):
    out = tmp_path / "g"
    run_cli("gmu", "--mu-grid", "0.5:2:4", "--out", out)
    header, rows = read_csv(out / "gmu.csv")
    assert header == ["mu", "G", "H", "delta_sign"]
    mus = [r[0] for r in rows]
    assert mus == pytest.approx([0.5, 1.0, 1.5, 2.0])
    row1 = rows[1]
    assert row1[1] == pytest.approx(0.88212623231580767, rel=1e-12)
    assert row1[2] == 0.0 and row1[3] == 0.0
    assert all(r[1] > 0 for r in rows)


def test_gmu_unreachable_pair_gives_nan(tmp_path):
    out = tmp_path / "g2"
    run_cli("gmu", "--mu-grid", "0.5:1.5:3", "--d", "-40", "--out", out)
    _, rows = read_csv(out / "gmu.csv")
    # mu &gt; 1 with d &lt; 0 is unreachable: sign column must be nan there
    by_mu = {r[0]: r[3] for r in rows}
    assert by_mu[0.5] == 1.0  # growth window inside the strong-dipole well
    assert math.isnan(by_mu[1.5])


def test_simulate_deterministic_and_replay(tmp_path):
    args = ("simulate", "--beta", "0.01", "--t-max", "6", "--dt-base", "0.5",
            "--seed", "777")
    out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run_cli(*args, "--out", out1)
    run_cli(*args, "--out", out2)
    names = ["trajectory.csv", "histogram.csv", "runs.csv", "simulate.png"]
    for name in names:
        assert digest(out1 / name) == digest(out2 / name), name
    doc1 = json.loads((out1 / "manifest.json").read_text())
    assert doc1["seeds"] == [777]
    # replay from the manifest alone reproduces every byte
    run_cli("--from-manifest", out1 / "manifest.json", "--out", out3)
    for name in names:
        assert digest(out1 / name) == digest(out3 / name), name
    doc3 = json.loads((out3 / "manifest.json").read_text())
    for key in ("command", "parameters", "seeds", "outputs", "code_version"):
        assert doc1[key] == doc3[key]


def test_simulate_trajectory_content(tmp_path):
    out = tmp_path / "t"
    run_cli("simulate", "--beta", "0", "--t-max", "6", "--dt-base", "0.5",
            "--eps", "0.5", "--out", out)
    header, rows = read_csv(out / "trajectory.csv")
    assert header == ["t", "rx", "ry", "rz", "vx", "vy", "vz", "energy", "L"]
    arr = np.array(rows)
    assert arr[0, 0] == 0.0
    assert np.allclose(arr[:, 8], arr[0, 8], atol=1e-9)  # L conserved
    assert np.allclose(arr[:, 7], -0.5, atol=1e-9)       # energy -k^2/2
    hheader, hrows = read_csv(out / "histogram.csv")
    assert hheader == ["bin_lo", "bin_hi", "weight"]
    assert sum(r[2] for r in hrows) == pytest.approx(0.5 * len(rows))


def test_simulate_ensemble_matches_singles(tmp_path):
    base = ("--beta", "0.01", "--t-max", "4", "--dt-base", "0.5")
    ens = tmp_path / "ens"
    run_cli("simulate", *base, "--seed", "900", "--ensemble", "2",
            "--out", ens)
    doc = json.loads((ens / "manifest.json").read_text())
    assert doc["seeds"] == [900, 901]
    with open(ens / "runs.csv", newline="") as fh:
        runs = list(csv.reader(fh))[1:]
    assert len(runs) == 2 and runs[0][1] == "900"
    for i, seed in enumerate((900, 901)):
        single = tmp_path / ("s%d" % seed)
        run_cli("simulate", *base, "--seed", seed, "--out", single)
        assert digest(single / "trajectory.csv") == digest(
            ens / ("trajectory_%03d.csv" % i))


def test_field_check_exact_column(tmp_path):
    out = tmp_path / "f"
    run_cli("field-check", "--n-seeds", "120", "--n-modes", "256",
            "--lag-grid", "0:5:6", "--tau-c", "1e-3", "--out", out)
    header, rows = read_csv(out / "field_check.csv")
    assert header == ["lag", "estimate", "stderr", "exact"]
    assert len(rows) == 6
    for lag, est, se, exact in rows:
        assert exact == pytest.approx(exact_autocorrelation(lag, 1e-3),
                                      rel=1e-12)
        assert abs(est - exact) <= max(5.0 * se, 0.02 * abs(rows[0][3]))


def test_phase_outputs(tmp_path):
    out = tmp_path / "p"
    run_cli("phase", "--d", "0", "--r-grid", "0.1:3:8",
            "--L-grid", "0.1:1.5:7", "--n-energy", "24", "--n-kappa", "20",
            "--out", out)
    header, rows = read_csv(out / "psi0.csv")
    assert header == ["r", "psi0", "psi0_sq", "marginal"]
    for r, p0, p0sq, marg in rows:
        assert p0sq == pytest.approx(p0 * p0, rel=1e-12)
        assert marg == pytest.approx(p0sq, rel=1e-8)
    _, mrows = read_csv(out / "p_e_kappa.csv")
    assert sum(r[3] for r in mrows) == pytest.approx(1.0, abs=1e-6)
    assert (out / "l_curve.csv").exists()

    out2 = tmp_path / "p2"
    run_cli("phase", "--d", "0.1", "--r-grid", "0.1:3:4",
            "--L-grid", "0.1:1.5:4", "--n-energy", "24", "--n-kappa", "20",
            "--out", out2)
    assert not (out2 / "l_curve.csv").exists()
    doc = json.loads((out2 / "manifest.json").read_text())
    assert "l_curve.csv" not in {o["path"] for o in doc["outputs"]}


def test_fig1_overlay_scaling(tmp_path):
    out = tmp_path / "o"
    run_cli("fig1-overlay", "--n-runs", "2", "--t-max", "6",
            "--dt-base", "0.5", "--beta", "0.01", "--out", out)
    header, rows = read_csv(out / "overlay.csv")
    assert header == ["bin_lo", "bin_hi", "weight", "curve_density",
                      "curve_scaled"]
    total = sum(r[2] for r in rows)
    for lo, hi, w, dens, scaled in rows:
        assert scaled == pytest.approx(dens * total * (hi - lo), rel=1e-9)
    assert (out / "fig1_overlay.png").read_bytes()[:4] == b"\x89PNG"


def test_error_reporting():
    proc = run_cli("phase", "--d", "0.3", expect=2)
    lines = proc.stderr.strip().splitlines()
    assert len(lines) == 1
    doc = json.loads(lines[0])
    assert doc["error"] == "domain" and doc["command"] == "phase"
    run_cli("simulate", "--beta", "-0.5", expect=2)
    run_cli("rates", expect=2)  # no mode selected
    run_cli("no-such-command", expect=2)
    proc = run_cli("--from-manifest", "/nonexistent/m.json", expect=2)
    json.loads(proc.stderr.strip())


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kappa": 0.7}))
    out = tmp_path / "r"
    run_cli("rates", "--config", cfg, "--kappa", "0.5", "--out", out)
    _, rows = read_csv(out / "rates.csv")
    assert rows[0][0] == 0.5  # flag beats config
    cfg2 = tmp_path / "cfg2.json"
    cfg2.write_text(json.dumps({"kappa": 0.7, "bogus": 1}))
    proc = run_cli("rates", "--config", cfg2, expect=2)
    assert "bogus" in json.loads(proc.stderr.strip())["message"]
