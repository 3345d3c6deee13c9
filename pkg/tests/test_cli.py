import json
import subprocess
import sys

import pytest

from fgnls.cli import main

PAPER = {"mode": "focusing", "alphas": [[0.1, 2.0], [0.0, 0.5], [-0.1, 1.0]]}
DNLS = {"mode": "defocusing", "bands": [[0.0, 1.0], [2.0, 2.5]]}


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def test_periods_json(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", PAPER)
    assert main(["periods", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert all(out["invariants"].values())
    tau = out["tau"]
    assert abs(tau[0][1][0] - tau[1][0][0]) < 1e-8 and abs(tau[0][1][1] - tau[1][0][1]) < 1e-8


def test_periods_defocusing_flags(tmp_path, capsys):
    cfg = write(tmp_path, "d.json", DNLS)
    assert main(["periods", "--config", cfg]) == 0
    assert json.loads(capsys.readouterr().out)["invariants"]["re_tau_pattern"]


def test_malformed_json_exit_1(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", "{not json")
    assert main(["periods", "--config", cfg]) == 1
    assert "malformed JSON" in capsys.readouterr().err


def test_invalid_surface_exit_1(tmp_path):
    cfg = write(tmp_path, "dup.json", {"mode": "focusing", "alphas": [[0, 1], [0, 1]]})
    assert main(["periods", "--config", cfg]) == 1


def test_unknown_command_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--config", "x.json"])
    assert exc.value.code == 1


def test_csv_for_non_grid_is_usage_error(tmp_path):
    cfg = write(tmp_path, "s.json", PAPER)
    assert main(["theta", "--config", cfg, "--format", "csv"]) == 1


def test_theta_command(tmp_path, capsys):
    cfg = write(tmp_path, "t.json", {"surface": PAPER, "z": [[0.1, 0.0], [0.2, 0.0]]})
    assert main(["theta", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["change"] < 1e-10
    assert abs(out["value"][1]) < 1e-9


def test_fgrid_single_cell(tmp_path):
    cfg = write(tmp_path, "f.json", {"surface": PAPER, "n": 1})
    out = tmp_path / "f.csv"
    assert main(["fgrid", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# axes: Omega1=0.0:0.0:1,Omega2=0.0:0.0:1")
    assert lines[1] == "x1,x2,re,im,abs"
    assert len(lines) == 3
    assert float(lines[2].split(",")[-1]) == pytest.approx(1.0, abs=1e-10)


def test_fgrid_deterministic(tmp_path):
    cfg = write(tmp_path, "f.json", {"surface": PAPER, "n": 30})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["fgrid", "--config", cfg, "--out", str(a)]) == 0
    assert main(["fgrid", "--config", cfg, "--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_surface_from_separate_file(tmp_path):
    write(tmp_path, "surf.json", PAPER)
    cfg = write(tmp_path, "f.json", {"surface": "surf.json", "n": 4})
    assert main(["fgrid", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 0


def test_psigrid_json(tmp_path):
    cfg = write(tmp_path, "p.json", {"surface": DNLS, "x": [-1, 1, 5], "t": [0, 1, 3]})
    out = tmp_path / "p.json.out"
    assert main(["psigrid", "--config", cfg, "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert len(data["abs"]) == 5 and len(data["abs"][0]) == 3
    assert max(max(r) for r in data["abs"]) <= 0.75 + 1e-6


def test_psigrid_bad_axis(tmp_path):
    cfg = write(tmp_path, "p.json", {"surface": PAPER, "x": [0, 1], "t": [0, 1, 3]})
    assert main(["psigrid", "--config", cfg]) == 1


def test_threads_env_fallback(tmp_path, monkeypatch):
    cfg = write(tmp_path, "f.json", {"surface": PAPER, "n": 4})
    monkeypatch.setenv("FGNLS_THREADS", "two")
    assert main(["fgrid", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 1
    monkeypatch.setenv("FGNLS_THREADS", "2")
    assert main(["fgrid", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 0


def test_nonpositive_tol(tmp_path):
    cfg = write(tmp_path, "s.json", PAPER)
    assert main(["periods", "--config", cfg, "--tol", "-1"]) == 1


def test_check_passes(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", PAPER)
    assert main(["check", "--config", cfg, "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["pass"]


def test_check_corrupted_tau_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"surface": PAPER, "test_corrupt_tau": 1e-3})
    assert main(["check", "--config", cfg]) == 2
    report = json.loads(capsys.readouterr().out)
    assert not report["checks"]["tau_symmetric"]["pass"]


def test_check_defocusing_reports_dnls(tmp_path, capsys):
    cfg = write(tmp_path, "d.json", DNLS)
    assert main(["check", "--config", cfg]) == 0
    checks = json.loads(capsys.readouterr().out)["checks"]
    assert checks["dnls_bound_check"]["pass"]


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, "s.json", PAPER)
    res = subprocess.run([sys.executable, "-m", "fgnls.cli", "periods", "--config", cfg],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["genus"] == 2
