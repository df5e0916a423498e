"""Command-line interface: exit codes, formats, and deterministic output."""

import json
import subprocess
import sys

import numpy as np
import pytest

from activeflux import cli


def run_cli(*argv):
    return cli.main(list(argv))


def test_no_arguments_is_a_usage_error(capsys):
    assert run_cli() == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_help_exits_cleanly(capsys):
    assert run_cli("--help") == 0
    out = capsys.readouterr().out
    for sub in ("verify", "spectrum", "solve", "mass-scan"):
        assert sub in out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_passes_and_prints_summary(capsys):
    assert run_cli("verify", "--n", "8") == 0
    out = capsys.readouterr().out
    assert "36/36 checks passed (n = 8)" in out
    assert "FAIL" not in out


def test_verify_on_three_cell_ring(capsys):
    assert run_cli("verify", "--n", "3") == 0
    assert "34/34 checks passed (n = 3)" in capsys.readouterr().out


def test_verify_json_output(tmp_path, capsys):
    path = tmp_path / "report.json"
    assert run_cli("verify", "--n", "6", "--format", "json", "--output", str(path)) == 0
    capsys.readouterr()
    payload = json.loads(path.read_text())
    assert payload["schema_version"] == 1
    assert payload["config"]["command"] == "verify"
    assert len(payload["reports"]) == 36
    for rep in payload["reports"]:
        assert rep["passed"] is True
        assert rep["residual"] <= rep["tolerance"]


def test_verify_csv_output(tmp_path, capsys):
    path = tmp_path / "report.csv"
    assert run_cli("verify", "--n", "6", "--format", "csv", "--output", str(path)) == 0
    capsys.readouterr()
    lines = path.read_text().splitlines()
    data = [ln for ln in lines if not ln.startswith("#")]
    assert data[0] == "name,passed,residual,tolerance"
    assert len(data) == 37
    assert all(row.split(",")[1] == "1" for row in data[1:])


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def test_spectrum_default_operator(capsys):
    assert run_cli("spectrum", "--n", "12") == 0
    out = capsys.readouterr().out
    data = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert data[0] == "k,theta,re_lambda_1,im_lambda_1,re_lambda_2,im_lambda_2"
    assert len(data) == 13
    k0 = data[1].split(",")
    assert int(k0[0]) == 0 and float(k0[1]) == 0.0


def test_spectrum_dissipation_matches_closed_form(capsys):
    n = 16
    assert run_cli("spectrum", "--operator", "dissipation", "--n", str(n)) == 0
    out = capsys.readouterr().out
    rows = [ln.split(",") for ln in out.splitlines() if ln and not ln.startswith("#")][1:]
    for row in rows:
        theta = float(row[1])
        lams = sorted([float(row[2]), float(row[4])])
        expected = -(2.0 / 3.0) * (18.0 + 17.0 * np.cos(theta) + np.cos(2.0 * theta))
        assert lams[0] == pytest.approx(expected, abs=1e-10)
        assert lams[1] == pytest.approx(0.0, abs=1e-10)
        assert abs(float(row[3])) < 1e-13 and abs(float(row[5])) < 1e-13


def test_spectrum_operator_file_roundtrip(tmp_path, capsys):
    op_path = tmp_path / "op.json"
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert (
        run_cli(
            "spectrum", "--n", "10", "--operator", "d-minus",
            "--dump-operator", str(op_path), "--output", str(out_a),
        )
        == 0
    )
    assert (
        run_cli(
            "spectrum", "--n", "10", "--operator", f"file:{op_path}", "--output", str(out_b)
        )
        == 0
    )
    capsys.readouterr()
    data_a = [ln for ln in out_a.read_text().splitlines() if not ln.startswith("#")]
    data_b = [ln for ln in out_b.read_text().splitlines() if not ln.startswith("#")]
    assert data_a == data_b


def test_spectrum_unknown_operator(capsys):
    assert run_cli("spectrum", "--operator", "laplacian") == 2
    assert "error:" in capsys.readouterr().err


def test_spectrum_missing_operator_file(capsys):
    assert run_cli("spectrum", "--operator", "file:/nonexistent/op.json") == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def test_solve_writes_energy_trace(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    assert (
        run_cli("solve", "--n", "24", "--t-end", "1.0", "--output", str(path)) == 0
    )
    capsys.readouterr()
    lines = path.read_text().splitlines()
    assert any(ln.startswith("#") for ln in lines)
    data = [ln for ln in lines if not ln.startswith("#")]
    assert data[0] == "t,energy,gamma"
    first = data[1].split(",")
    assert float(first[0]) == 0.0 and float(first[2]) == 1.0
    energies = [float(ln.split(",")[1]) for ln in data[1:]]
    e = np.array(energies)
    assert np.abs(e - e[0]).max() <= 1e-12 * e[0]


def test_solve_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert (
            run_cli(
                "solve", "--variant", "upwind", "--n", "20", "--t-end", "0.8",
                "--output", str(path),
            )
            == 0
        )
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_solve_json_and_final_state(tmp_path, capsys):
    trace_path = tmp_path / "trace.json"
    state_path = tmp_path / "state.json"
    assert (
        run_cli(
            "solve", "--n", "16", "--t-end", "0.5", "--format", "json",
            "--output", str(trace_path), "--final-state", str(state_path),
        )
        == 0
    )
    capsys.readouterr()
    trace = json.loads(trace_path.read_text())
    assert trace["config"]["variant"] == "central"
    times = trace["trace"]["times"]
    assert times[0] == 0.0 and len(times) == len(trace["trace"]["energies"])
    state = json.loads(state_path.read_text())
    assert len(state["u"]) == 32
    assert all(np.isfinite(state["u"]))


def test_solve_unstable_combination_fails_cleanly(capsys):
    code = run_cli("solve", "--variant", "upwind", "--rk", "rk4", "--no-relaxation")
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_solve_custom_tableau(tmp_path, capsys):
    path = tmp_path / "rk4.json"
    path.write_text(
        json.dumps(
            {
                "name": "classical",
                "a": [[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1, 0]],
                "b": [1 / 6, 1 / 3, 1 / 3, 1 / 6],
                "c": [0, 0.5, 0.5, 1],
            }
        )
    )
    assert (
        run_cli("solve", "--n", "16", "--t-end", "0.5", "--rk", f"custom:{path}") == 0
    )
    capsys.readouterr()


def test_solve_bad_custom_tableau(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{}")
    assert run_cli("solve", "--rk", f"custom:{path}") == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# mass-scan
# ---------------------------------------------------------------------------


def test_mass_scan_classifies_window(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    assert (
        run_cli(
            "mass-scan", "--mp-min", "0.1", "--mp-max", "0.7", "--steps", "4",
            "--output", str(path),
        )
        == 0
    )
    capsys.readouterr()
    data = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert data[0] == "m_v,m_p,classification,zero_multiplicity,min_eigenvalue"
    rows = [ln.split(",") for ln in data[1:]]
    assert [r[2] for r in rows] == [
        "indefinite",          # 0.1
        "positive_definite",   # 0.3
        "positive_definite",   # 0.5
        "indefinite",          # 0.7 > 2/3
    ]
    assert all(float(r[0]) == 1.0 for r in rows)


def test_mass_scan_endpoint_semidefinite(capsys):
    assert (
        run_cli(
            "mass-scan",
            "--mp-min", str(2.0 / 3.0), "--mp-max", str(2.0 / 3.0), "--steps", "1",
        )
        == 0
    )
    out = capsys.readouterr().out
    row = [ln for ln in out.splitlines() if not ln.startswith("#")][1].split(",")
    assert row[2] == "positive_semidefinite"
    assert int(row[3]) == 1


def test_mass_scan_rejects_bad_ranges(capsys):
    assert run_cli("mass-scan", "--mp-min", "0.5", "--mp-max", "0.2") == 2
    assert run_cli("mass-scan", "--mp-min", "0.2", "--mp-max", "0.5", "--steps", "0") == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# installed entry point
# ---------------------------------------------------------------------------


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "activeflux.cli", "verify", "--n", "4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "36/36 checks passed" in proc.stdout
