import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from barofv.cli import main
from barofv.runio import read_error_report, read_manifest, read_run_log, read_snapshot


def run_cli(*argv):
    return main(list(argv))


def test_run_delta_shock_writes_outputs(tmp_path):
    out = tmp_path / "run1"
    rc = run_cli(
        "run", "--case", "delta-shock", "--kappa", "1", "--scheme", "stab",
        "--k", "64", "--out", str(out),
    )
    assert rc == 0
    assert (out / "snapshot_final.csv").exists()
    log = read_run_log(out / "run_log.csv")
    assert len(log) > 0
    assert all(row["entropy_ok"] == "1" for row in log)
    assert float(log[-1]["t"]) == pytest.approx(0.2, rel=1e-12)
    section, manifest = read_manifest(out / "manifest.ini")
    assert section == "run"
    # manifest records everything needed to re-run
    for key in ("case", "scheme", "k", "t_end", "eos_a", "eos_gamma",
                "eta_safety", "cfl_safety", "newton_tol"):
        assert key in manifest


def test_run_rusanov_mass_conserved(tmp_path):
    out = tmp_path / "rus"
    rc = run_cli(
        "run", "--case", "kelvin-helmholtz", "--scheme", "rusanov",
        "--k", "128", "--out", str(out),
    )
    assert rc == 0
    log = read_run_log(out / "run_log.csv")
    masses = [float(r["mass"]) for r in log]
    assert all(abs(m - masses[0]) <= 1e-12 * masses[0] for m in masses)


def test_invalid_case_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli("run", "--case", "no-such-case", "--k", "8", "--out", "/tmp/x")
    assert exc.value.code != 0


def test_solver_failure_exits_nonzero(tmp_path, monkeypatch, capsys):
    import barofv.cli as cli
    from barofv.stab import StepFailure

    def boom(*a, **kw):
        raise StepFailure("no admissible step")

    monkeypatch.setattr(cli, "run_single", boom)
    rc = run_cli("run", "--case", "delta-shock", "--k", "8", "--out", str(tmp_path))
    assert rc == 1
    assert "no admissible step" in capsys.readouterr().err


def test_cli_entry_point_subprocess(tmp_path):
    # exercise the installed console script path end to end
    out = tmp_path / "sp"
    proc = subprocess.run(
        [sys.executable, "-m", "barofv.cli", "run", "--case", "delta-shock",
         "--k", "32", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    proc2 = subprocess.run(
        [sys.executable, "-m", "barofv.cli", "run", "--case", "bogus",
         "--k", "8", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc2.returncode != 0


def test_snapshot_roundtrip(tmp_path):
    out = tmp_path / "run2"
    run_cli("run", "--case", "delta-shock", "--k", "32", "--out", str(out),
            "--t-end", "0.05")
    mesh, state = read_snapshot(out / "snapshot_final.csv")
    assert mesh.shape == (32,)
    assert mesh.lower[0] == pytest.approx(-1.0, abs=1e-12)
    assert np.all(state.rho.values > 0)


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_cli("run", "--case", "delta-shock", "--k", "32", "--out", str(out),
                "--t-end", "0.05")
    for name in ("snapshot_final.csv", "run_log.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_degenerate_study_zero_e1(tmp_path):
    out = tmp_path / "study0"
    rc = run_cli(
        "study", "--case", "delta-shock", "--k", "32", "--ref-k", "32",
        "--scheme", "rusanov", "--out", str(out), "--t-end", "0.04",
    )
    assert rc == 0
    rows = read_error_report(out / "error_report.csv")
    assert all(r.E1 == 0.0 for r in rows)


def test_study_and_report_roundtrip(tmp_path):
    out = tmp_path / "study1"
    rc = run_cli(
        "study", "--case", "delta-shock", "--kappa", "1", "--k", "16,32",
        "--ref-k", "64", "--out", str(out), "--t-end", "0.05",
    )
    assert rc == 0
    first = (out / "error_report.csv").read_bytes()
    rows = read_error_report(out / "error_report.csv")
    assert {r.variable for r in rows} == {"rho", "m1"}
    assert len(rows) == 4  # 2 variables x 2 resolutions

    rc = run_cli("report", "--out", str(out))
    assert rc == 0
    assert (out / "error_report.csv").read_bytes() == first


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "conf.ini"
    cfg.write_text(
        "[run]\ncase = delta-shock\nk = 16\nt-end = 0.02\n"
    )
    out = tmp_path / "cfg-run"
    rc = run_cli("run", "--config", str(cfg), "--out", str(out), "--k", "32")
    assert rc == 0
    _, manifest = read_manifest(out / "manifest.ini")
    assert manifest["k"] == "32"  # flag wins
    assert float(manifest["t_end"]) == pytest.approx(0.02)


def test_snapshot_cadence_writes_intermediates(tmp_path):
    out = tmp_path / "snaps"
    rc = run_cli("run", "--case", "delta-shock", "--k", "32", "--out", str(out),
                 "--t-end", "0.05", "--snapshots", "3")
    assert rc == 0
    intermediates = sorted(out.glob("snapshot_0*.csv"))
    assert intermediates, "expected snapshot_NNNNNN.csv files"
    mesh, st = read_snapshot(intermediates[0])
    assert mesh.shape == (32,)


def test_threads_study_matches_sequential(tmp_path):
    seq = tmp_path / "seq"
    par = tmp_path / "par"
    args = ["study", "--case", "delta-shock", "--k", "16,32", "--ref-k", "32",
            "--t-end", "0.04"]
    assert run_cli(*args, "--out", str(seq)) == 0
    assert run_cli(*args, "--out", str(par), "--threads", "2") == 0
    assert (seq / "error_report.csv").read_bytes() == (par / "error_report.csv").read_bytes()
