import json
import subprocess
import sys

import numpy as np
import pytest

from hybridfx import load_covariance_json, load_returns_csv
from hybridfx.cli import main


def run(args):
    return main([str(a) for a in args])


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_writes_rows_and_manifest(tmp_path):
    out = tmp_path / "run.csv"
    assert run(["simulate", "--n", 2, "--m", 4, "--alpha", "1e-4", "--steps", 5000,
                "--seed", 7, "--cov", "equicorrelated:0.9,0.01", "--out", out]) == 0
    series = load_returns_csv(out)
    assert len(series) == 4998  # default burn-in drops the n warm-up rows
    manifest = read_json(tmp_path / "run.csv.manifest.json")
    assert manifest["seed"] == 7
    assert "PCG64" in manifest["rng_algorithm"]
    assert str(out) in manifest["output_digests"]


def test_simulate_pure_trend_no_vol_columns(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["simulate", "--mode", "pure-trend", "--n", 2, "--steps", 1000,
                "--seed", 1, "--burn-in", 0, "--out", out]) == 0
    header = out.read_text().splitlines()[0]
    assert header == "k,x"
    assert len(load_returns_csv(out)) == 1000


def test_simulate_record_internals_columns(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["simulate", "--steps", 500, "--seed", 3,
                "--cov", "equicorrelated:0.5,0.01", "--record-internals",
                "--out", out]) == 0
    header = out.read_text().splitlines()[0]
    assert header == "k,x,g,y1,y2,y3,y4"


def test_simulate_missing_cov_usage_error(tmp_path, capsys):
    assert run(["simulate", "--steps", 1000, "--seed", 1,
                "--out", tmp_path / "x.csv"]) == 2
    assert "--cov" in capsys.readouterr().err


def test_simulate_missing_seed_exits_2(tmp_path):
    with pytest.raises(SystemExit) as err:
        run(["simulate", "--steps", 1000, "--cov", "equicorrelated:0.5,0.01",
             "--out", tmp_path / "x.csv"])
    assert err.value.code == 2


def test_simulate_bad_flag_exits_2(tmp_path):
    with pytest.raises(SystemExit) as err:
        run(["simulate", "--bogus", 1])
    assert err.value.code == 2


def test_simulate_runtime_error_exit_1(tmp_path, capsys):
    assert run(["simulate", "--steps", 1000, "--seed", 1, "--m", 4,
                "--cov", "equicorrelated:2.0,0.01", "--out", tmp_path / "x.csv"]) == 1
    assert "error:" in capsys.readouterr().err


def test_simulate_replicas_write_separate_files(tmp_path):
    out = tmp_path / "run.csv"
    assert run(["simulate", "--steps", 800, "--seed", 5, "--replicas", 3,
                "--cov", "equicorrelated:0.9,0.01", "--out", out]) == 0
    a = load_returns_csv(tmp_path / "run_r000.csv")
    b = load_returns_csv(tmp_path / "run_r001.csv")
    assert not np.array_equal(a.values, b.values)
    manifest = read_json(tmp_path / "run.csv.manifest.json")
    assert len(manifest["output_digests"]) == 3


def test_simulate_replay_byte_identical(tmp_path):
    args = ["simulate", "--steps", 3000, "--seed", 11,
            "--cov", "equicorrelated:0.9,0.01", "--record-internals"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--out", b]) == 0
    assert a.read_bytes() == b.read_bytes()
    ma = read_json(tmp_path / "a.csv.manifest.json")
    mb = read_json(tmp_path / "b.csv.manifest.json")
    assert (ma["output_digests"][str(a)] == mb["output_digests"][str(b)])


# ---------------------------------------------------------------------------
# qprob
# ---------------------------------------------------------------------------

def test_qprob_identity_binomial_value(tmp_path):
    out = tmp_path / "q.json"
    assert run(["qprob", "--cov", "equicorrelated:0,1", "--m", 4,
                "--samples", 200_000, "--seed", 3, "--out", out]) == 0
    doc = read_json(out)
    est = doc["q_estimate"]
    assert est["method"] == "monte-carlo"
    assert abs(est["q"] - 0.3125) < 4 * est["std_error"]
    assert doc["sign_sum_measure"]["support"] == [-4, -2, 0, 2, 4]
    assert (tmp_path / "q.json.manifest.json").exists()


def test_qprob_stdout_includes_manifest(capsys):
    assert run(["qprob", "--cov", "equicorrelated:0.5,1", "--m", 2,
                "--samples", 5000, "--seed", 9]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["manifest"]["seed"] == 9


def test_qprob_requires_seed():
    with pytest.raises(SystemExit) as err:
        run(["qprob", "--cov", "equicorrelated:0,1", "--m", 4])
    assert err.value.code == 2


def test_qprob_equicorrelated_needs_m(capsys):
    assert run(["qprob", "--cov", "equicorrelated:0,1", "--seed", 1]) == 2
    assert "--m" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# calibrate-cov
# ---------------------------------------------------------------------------

def make_vols_csv(path, rows=400, seed=0):
    rng = np.random.default_rng(seed)
    levels = 0.1 * np.exp(np.cumsum(rng.normal(0, 0.01, size=(rows, 4)), axis=0))
    lines = ["1m,3m,6m,1y"] + [",".join(f"{v:.10g}" for v in row) for row in levels]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_calibrate_cov_roundtrip(tmp_path):
    vols = make_vols_csv(tmp_path / "vols.csv")
    out = tmp_path / "cov.json"
    assert run(["calibrate-cov", "--input", vols, "--out", out]) == 0
    cov = load_covariance_json(out)
    assert cov.m == 4
    doc = read_json(out)
    assert doc["m"] == 4 and len(doc["entries"]) == 16


def test_calibrate_cov_then_simulate(tmp_path):
    vols = make_vols_csv(tmp_path / "vols.csv", seed=2)
    covj = tmp_path / "cov.json"
    assert run(["calibrate-cov", "--input", vols, "--out", covj]) == 0
    out = tmp_path / "run.csv"
    assert run(["simulate", "--steps", 2000, "--seed", 2, "--cov", covj,
                "--out", out]) == 0
    assert len(load_returns_csv(out)) == 1998


def test_calibrate_cov_ridge(tmp_path):
    # two repeating rows give a singular sample covariance; ridge rescues it
    lines = ["a,b", *(["0.1,0.2", "0.2,0.4"] * 10)]
    vols = tmp_path / "degenerate.csv"
    vols.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out = tmp_path / "cov.json"
    assert run(["calibrate-cov", "--input", vols, "--out", out]) == 1  # singular
    assert run(["calibrate-cov", "--input", vols, "--ridge", "1e-6",
                "--out", out]) == 0
    assert load_covariance_json(out).m == 2


# ---------------------------------------------------------------------------
# analyze / compare
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def run_csvs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    hyb, pure = base / "hybrid.csv", base / "pure.csv"
    assert run(["simulate", "--steps", 60_000, "--seed", 8,
                "--cov", "equicorrelated:0.9,0.01", "--out", hyb]) == 0
    assert run(["simulate", "--steps", 60_000, "--seed", 8, "--mode", "pure-trend",
                "--out", pure]) == 0
    return hyb, pure


def test_analyze_bundle_and_plots(tmp_path, run_csvs):
    hyb, _ = run_csvs
    bundle = tmp_path / "bundle.json"
    plots = tmp_path / "plots"
    assert run(["analyze", "--input", hyb, "--n", 2, "--window", 10,
                "--out-bundle", bundle, "--out-plots", plots]) == 0
    doc = read_json(bundle)
    for key in ("flips", "ccdf", "decay", "q_from_decay", "kurtosis_excess",
                "npp", "phase", "rv_phase", "rv_lag1_corr"):
        assert key in doc
    assert doc["decay"]["rate"] < 0
    for name in ("ccdf", "npp", "phase", "rv_phase"):
        f = plots / f"{name}.csv"
        assert f.exists() and len(f.read_text().splitlines()) > 1
    assert (tmp_path / "bundle.json.manifest.json").exists()
    # plot files count matches the bundle echo
    npp = (plots / "npp.csv").read_text().splitlines()
    assert len(npp) - 1 == doc["npp"]["points"]


def test_analyze_stdout_mode(run_csvs, capsys):
    hyb, _ = run_csvs
    assert run(["analyze", "--input", hyb]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert "decay" in doc
    assert str(hyb) in doc["manifest"]["input_digests"]


def test_analyze_missing_input_exit_1(tmp_path, capsys):
    assert run(["analyze", "--input", tmp_path / "absent.csv"]) == 1
    assert "absent.csv" in capsys.readouterr().err


def test_compare_hybrid_decays_faster(tmp_path, run_csvs):
    hyb, pure = run_csvs
    out = tmp_path / "cmp.json"
    assert run(["compare", "--a", hyb, "--b", pure, "--n", 2, "--out", out]) == 0
    doc = read_json(out)
    assert doc["a"]["decay_rate"] < doc["b"]["decay_rate"]
    assert set(doc["a"]) == set(doc["b"])
    for side in ("a", "b"):
        assert {"decay_rate", "kurtosis_excess", "rv_lag1_corr"} <= set(doc[side])


# ---------------------------------------------------------------------------
# entry point and version
# ---------------------------------------------------------------------------

def test_version_names_prng(capsys):
    with pytest.raises(SystemExit) as err:
        run(["--version"])
    assert err.value.code == 0
    out = capsys.readouterr().out
    assert "hybridfx" in out and "PCG64" in out


def test_module_entry_point_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hybridfx", "qprob", "--cov", "equicorrelated:0,1",
         "--m", "2", "--samples", "2000", "--seed", "1"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["q_estimate"]["method"] == "monte-carlo"
