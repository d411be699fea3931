import math
import subprocess
import sys

import pytest

from plasmonqed.bloch import saturation_closed_form
from plasmonqed.core import params_from_purcell
from plasmonqed.scatter import scatter_point


def run_cli(*args, check=False):
    proc = subprocess.run(
        [sys.executable, "-m", "plasmonqed.cli", *args],
        capture_output=True)
    if check and proc.returncode != 0:
        raise AssertionError(
            f"exit {proc.returncode}: {proc.stderr.decode(errors='replace')}")
    return proc


def parse_dataset(stdout: bytes):
    header, columns, rows = {}, [], []
    for line in stdout.decode().splitlines():
        if line.startswith("# columns:"):
            columns = line.removeprefix("# columns:").split()
        elif line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
        else:
            rows.append([float(tok) for tok in line.split()])
    return header, columns, rows


class TestScatter:
    def test_resonant_row(self):
        proc = run_cli("scatter", "--set", "delta=-2:2:11", "--workers", "1",
                       check=True)
        header, columns, rows = parse_dataset(proc.stdout)
        assert header["command"] == "scatter"
        assert header["purcell"] == "20"
        assert columns == ["delta", "R", "T", "kappa"]
        assert len(rows) == 11
        resonant = rows[5]
        assert resonant[0] == 0.0
        # 17 significant digits round-trip the doubles exactly
        point = scatter_point(params_from_purcell(20.0), 0.0)
        assert resonant[1] == point.reflectance
        assert resonant[2] == point.transmittance
        assert resonant[1] == pytest.approx(400.0 / 441.0, abs=1e-15)

    def test_decoupled_never_reflects(self):
        proc = run_cli("scatter", "--set", "purcell=0",
                       "--set", "delta=-1:1:5", check=True)
        _, _, rows = parse_dataset(proc.stdout)
        assert all(row[1] == 0.0 for row in rows)
        assert all(row[2] == 1.0 for row in rows)


class TestSaturation:
    def test_reference_drive(self):
        proc = run_cli("saturation", check=True)
        _, columns, rows = parse_dataset(proc.stdout)
        assert columns[:3] == ["omega", "T_closed", "R_closed"]
        by_omega = {row[0]: row for row in rows}
        t_closed = by_omega[1.0][1]
        assert t_closed == saturation_closed_form(20.0, 1.0)[0]
        assert t_closed == pytest.approx(0.889141, abs=1e-6)
        # numeric steady state agrees with the closed form in every row
        for row in rows:
            assert row[3] == pytest.approx(row[1], abs=1e-10)
            assert row[4] == pytest.approx(row[2], abs=1e-10)


class TestG2:
    def test_transmitted_includes_analytic_columns(self):
        proc = run_cli("g2", "--set", "purcell=2", "--set", "n_times=21",
                       "--set", "tmax=2", "--workers", "1", check=True)
        _, columns, rows = parse_dataset(proc.stdout)
        assert columns == ["t", "g2_P2", "analytic_P2"]
        assert rows[0][2] == pytest.approx(9.0)  # (P^2 - 1)^2 at t = 0

    def test_reflected_has_no_analytic_columns(self):
        proc = run_cli("g2", "--set", "purcell=2", "--set", "branch=reflected",
                       "--set", "n_times=21", "--set", "tmax=2",
                       "--workers", "1", check=True)
        _, columns, rows = parse_dataset(proc.stdout)
        assert columns == ["t", "g2_P2"]
        assert rows[0][1] == 0.0

    def test_worker_count_does_not_change_bytes(self):
        args = ("g2", "--set", "purcell=1,2", "--set", "n_times=21",
                "--set", "tmax=2")
        serial = run_cli(*args, "--workers", "1", check=True)
        parallel = run_cli(*args, "--workers", "2", check=True)
        assert serial.stdout == parallel.stdout


class TestJump:
    def test_weak_drive_ratios(self):
        proc = run_cli("jump", check=True)
        _, columns, rows = parse_dataset(proc.stdout)
        assert columns == ["omega", "coherence_ratio", "amplitude_ratio",
                           "coherence_weak_limit", "amplitude_weak_limit"]
        (omega, coh, amp, coh_lim, amp_lim) = rows[0]
        assert omega == 0.001
        assert coh_lim == 21.0
        assert amp_lim == -399.0
        assert coh == pytest.approx(21.0, rel=1e-2)
        assert amp == pytest.approx(-399.0, rel=1e-2)


class TestOracle:
    def test_single_grid_run(self):
        proc = run_cli("oracle", "--set", "n_modes=250", "--workers", "1",
                       check=True)
        header, columns, rows = parse_dataset(proc.stdout)
        assert columns == ["n_modes", "error", "R_sim", "T_sim", "loss_sim"]
        assert len(rows) == 1
        assert rows[0][0] == 250
        assert rows[0][1] < 1e-2
        assert "R_avg" in header

    def test_uncleared_pulse_exits_3(self):
        proc = run_cli("oracle", "--set", "n_modes=250",
                       "--set", "t_final=26", "--workers", "1")
        assert proc.returncode == 3
        assert b"invariant violated" in proc.stderr
        assert b"pulse-not-cleared" in proc.stderr


class TestStorage:
    def test_matched_run_summary(self):
        proc = run_cli("storage", "--set", "duration=20",
                       "--set", "n_samples=801", check=True)
        header, columns, rows = parse_dataset(proc.stdout)
        assert columns[:3] == ["t", "E_in_re", "E_in_im"]
        assert len(rows) == 801
        assert 0.93 < float(header["efficiency"]) < 0.95


class TestTransistor:
    def test_open_gate(self):
        proc = run_cli("transistor", "--set", "gate=0",
                       "--set", "trials=2000", check=True)
        _, columns, rows = parse_dataset(proc.stdout)
        row = dict(zip(columns, rows[0]))
        assert math.isnan(row["storage_efficiency"])
        assert row["gate_stored"] == 0.0
        assert row["gain_analytic"] == 20.0
        assert row["gain_mean"] == pytest.approx(20.0, rel=0.1)

    def test_closed_gate_stores_and_transmits(self):
        proc = run_cli("transistor", "--set", "gate=1", "--set", "trials=500",
                       "--set", "duration=20", "--seed", "0", check=True)
        _, columns, rows = parse_dataset(proc.stdout)
        row = dict(zip(columns, rows[0]))
        assert row["gate_stored"] == 1.0
        assert row["transmitted"] == 20.0
        assert row["reflected"] == 0.0

    def test_rejects_branching_below_purcell(self):
        proc = run_cli("transistor", "--set", "branching=10")
        assert proc.returncode == 2
        assert b"config error" in proc.stderr


class TestPlumbing:
    def test_byte_determinism(self):
        args = ("scatter", "--set", "delta=-1:1:5")
        assert run_cli(*args, check=True).stdout == run_cli(
            *args, check=True).stdout

    def test_out_file_matches_stdout(self, tmp_path):
        out = tmp_path / "spectrum.dat"
        streamed = run_cli("scatter", "--set", "delta=-1:1:5", check=True)
        run_cli("scatter", "--set", "delta=-1:1:5", "--out", str(out),
                check=True)
        assert out.read_bytes() == streamed.stdout

    def test_config_file_round_trip(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("purcell = 5  # trailing comment\ndelta = -1:1:5\n")
        proc = run_cli("scatter", "--config", str(cfg), check=True)
        header, _, rows = parse_dataset(proc.stdout)
        assert header["purcell"] == "5"
        assert len(rows) == 5

    def test_set_overrides_config_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("purcell = 5\ndelta = -1:1:5\n")
        proc = run_cli("scatter", "--config", str(cfg),
                       "--set", "purcell=2", check=True)
        header, _, _ = parse_dataset(proc.stdout)
        assert header["purcell"] == "2"

    def test_unknown_key_exits_2(self):
        proc = run_cli("scatter", "--set", "bogus=1")
        assert proc.returncode == 2
        assert b"config error" in proc.stderr
        assert b"unknown config key" in proc.stderr

    def test_bad_value_exits_2(self):
        proc = run_cli("scatter", "--set", "purcell=abc")
        assert proc.returncode == 2
        assert b"expected a number" in proc.stderr

    def test_empty_range_exits_2(self):
        proc = run_cli("scatter", "--set", "delta=0:0:5")
        assert proc.returncode == 2

    def test_zero_workers_exits_2(self):
        proc = run_cli("g2", "--set", "purcell=1,2", "--set", "n_times=5",
                       "--workers", "0")
        assert proc.returncode == 2

    def test_version(self):
        proc = run_cli("--version")
        assert proc.returncode == 0
        assert proc.stdout.decode().startswith("plasmonqed ")
