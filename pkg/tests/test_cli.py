"""Command-line interface: argument handling, wire formats, exit codes."""

import io
import json
import subprocess
import sys

import pytest

from tandemstab import cli


def run(capsys, *args):
    code = cli.main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


BURST = ["--prefix", "0.01,0.01,5", "--cycle", "0", "--mu2", "1"]


class TestParsing:
    def test_no_command_prints_help(self, capsys):
        code, out, _ = run(capsys)
        assert code == 1
        assert "analyze" in out and "simulate" in out

    def test_help_exits_zero(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        assert "COMMAND" in out

    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "analyze", "--cycle", "1", "--bogus")
        assert code == 1
        assert err.startswith("error:")

    def test_missing_spec(self, capsys):
        code, _, err = run(capsys, "analyze")
        assert code == 1
        assert "no system given" in err

    def test_unsupported_format(self, capsys):
        code, _, err = run(
            capsys, "analyze", "--cycle", "1", "--mu1", "1", "--mu2", "1",
            "--format", "csv",
        )
        assert code == 1
        assert "format" in err

    def test_bad_variant(self, capsys):
        code, _, err = run(
            capsys, "analyze", "--cycle", "1", "--mu1", "1", "--mu2", "1",
            "--variant", "saturated",
        )
        assert code == 1
        assert "variant" in err


class TestAnalyze:
    def test_stable_vanishing_rule(self, capsys):
        code, out, _ = run(
            capsys, "analyze", "--prefix", "1,1", "--cycle", "0",
            "--mu1", "0.5", "--mu2", "0.5",
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["status"] == "Stable"
        assert obj["witness"] == "T6ii"
        assert obj["spec"]["mu1"] == 0.5
        assert set(obj["criteria"]) == {
            "E_lambda_Z", "limsup_E", "liminf_lambda", "mu_min", "z",
        }

    def test_burst_rule_flips_with_service_speed(self, capsys):
        code, out, _ = run(capsys, "analyze", "--mu1", "0.2", *BURST)
        assert code == 0 and json.loads(out)["status"] == "Stable"
        code, out, _ = run(capsys, "analyze", "--mu1", "0.5", *BURST)
        assert code == 0 and json.loads(out)["status"] == "Unstable"

    def test_degenerate_exit_code(self, capsys):
        code, _, err = run(
            capsys, "analyze", "--prefix", "0,1", "--cycle", "1",
            "--mu1", "1", "--mu2", "1",
        )
        assert code == 2
        assert "degenerate: lambda(0)=0" in err

    def test_spec_from_file(self, capsys, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({
            "lambda": {"prefix": [1.0], "cycle": [0.0]},
            "mu1": 0.9, "mu2": 1.1, "variant": "base",
        }))
        code, out, _ = run(capsys, "analyze", "--spec", str(path))
        assert code == 0
        assert json.loads(out)["status"] == "Stable"

    def test_spec_from_stdin(self, capsys, monkeypatch):
        text = json.dumps({
            "lambda": {"prefix": [], "cycle": [2.0]},
            "mu1": 1.0, "mu2": 1.0, "variant": "base",
        })
        monkeypatch.setattr(sys, "stdin", io.StringIO(text))
        code, out, _ = run(capsys, "analyze", "--spec", "-")
        assert code == 0
        assert json.loads(out)["status"] == "Unstable"

    def test_output_flag_writes_file(self, capsys, tmp_path):
        dest = tmp_path / "verdict.json"
        code, out, _ = run(
            capsys, "analyze", "--cycle", "0.5", "--mu1", "1", "--mu2", "2",
            "--output", str(dest),
        )
        assert code == 0 and out == ""
        assert json.loads(dest.read_text())["status"] == "Stable"


class TestThreshold:
    def test_k_max(self, capsys):
        code, out, _ = run(capsys, "threshold", "--mu1", "0.9", "--mu2", "1.1")
        assert code == 0
        assert json.loads(out) == {"kind": "UpToKmax", "K_max": 10}

    def test_missing_rates(self, capsys):
        code, _, err = run(capsys, "threshold", "--mu1", "0.9")
        assert code == 1
        assert "mu2" in err


class TestLyapunov:
    def test_certificate_search(self, capsys):
        code, out, _ = run(
            capsys, "lyapunov", "--prefix", "1,1", "--cycle", "0",
            "--mu1", "0.9", "--mu2", "1.1",
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["criterion_holds"] is True
        cert = obj["certificate"]
        assert cert["r"] > 0
        assert cert["max_tail_drift"] < 0
        assert set(cert) == {"r", "n0", "window", "max_tail_drift"}

    def test_criterion_failure_has_no_certificate(self, capsys):
        code, out, _ = run(
            capsys, "lyapunov", "--cycle", "2", "--mu1", "1", "--mu2", "1",
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["criterion_holds"] is False
        assert "certificate" not in obj

    def test_drift_table_at_fixed_margin(self, capsys):
        code, out, _ = run(
            capsys, "lyapunov", "--cycle", "0.3", "--mu1", "1", "--mu2", "1.5",
            "--r", "0.2", "--window", "10",
        )
        assert code == 0
        obj = json.loads(out)
        assert obj["interior_drift"] == -0.2
        assert len(obj["boundary_drift"]) == 11
        assert obj["max_boundary_drift"] == max(d for _, d in obj["boundary_drift"])

    def test_window_exhaustion_exit_code(self, capsys):
        code, _, err = run(
            capsys, "lyapunov", "--cycle", "0.9993",
            "--mu1", "0.9995", "--mu2", "1.0", "--window", "1",
        )
        assert code == 3
        assert "window" in err


class TestPhaseDiagram:
    def test_small_grid(self, capsys):
        code, out, _ = run(
            capsys, "phase-diagram", "--mu1-min", "0.5", "--mu1-max", "1.5",
            "--mu2-min", "0.5", "--mu2-max", "1.5", "--step", "0.25",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "mu1,mu2,label"
        assert len(lines) == 26
        table = {tuple(l.split(",")[:2]): l.split(",")[2] for l in lines[1:]}
        assert table[("0.5", "0.5")] == "A2"
        assert table[("0.5", "1.5")] == "A4"
        assert table[("1.5", "1.5")] == "A1"
        assert table[("0.75", "1.25")] == "A3"

    def test_rows_follow_grid_order(self, capsys):
        _, out, _ = run(
            capsys, "phase-diagram", "--mu1-min", "1", "--mu1-max", "2",
            "--mu2-min", "1", "--mu2-max", "2", "--step", "1",
        )
        rows = [l.split(",")[:2] for l in out.strip().split("\n")[1:]]
        assert rows == [["1", "1"], ["1", "2"], ["2", "1"], ["2", "2"]]

    def test_bad_step(self, capsys):
        code, _, err = run(capsys, "phase-diagram", "--step", "0")
        assert code == 1
        assert "step" in err


class TestStationary:
    def test_csv_with_diagnostics_on_stderr(self, capsys):
        code, out, err = run(
            capsys, "stationary", "--cycle", "0.5", "--mu1", "1", "--mu2", "1.25",
            "--m1", "5", "--m2", "5",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "x1,x2,pi"
        assert len(lines) == 1 + 36
        total = sum(float(l.split(",")[2]) for l in lines[1:])
        assert total == pytest.approx(1.0, abs=1e-9)
        diag = json.loads(err)
        assert diag["grid"] == [5, 5]
        assert diag["residual"] <= 1e-8

    def test_json_format(self, capsys):
        code, out, _ = run(
            capsys, "stationary", "--cycle", "0.5", "--mu1", "1", "--mu2", "1.25",
            "--m1", "4", "--m2", "6", "--format", "json",
        )
        assert code == 0
        obj = json.loads(out)
        assert set(obj) == {"spec", "grid", "residual", "escape_mass", "pi"}
        pi = obj["pi"]
        assert len(pi) == 5 and len(pi[0]) == 7

    def test_degenerate_exit_code(self, capsys):
        code, _, _ = run(
            capsys, "stationary", "--prefix", "0", "--cycle", "1",
            "--mu1", "1", "--mu2", "1",
        )
        assert code == 2

    def test_grid_too_large_exit_code(self, capsys):
        code, _, err = run(
            capsys, "stationary", "--cycle", "0.5", "--mu1", "1", "--mu2", "1.25",
            "--m1", "300", "--m2", "300",
        )
        assert code == 1
        assert "cap" in err


SIM = [
    "simulate", "--cycle", "0.8", "--mu1", "1", "--mu2", "1.2",
    "--horizon", "200", "--seed", "3", "--reps", "2",
]


class TestSimulate:
    def test_json_payload(self, capsys):
        code, out, _ = run(capsys, *SIM)
        assert code == 0
        obj = json.loads(out)
        assert obj["config"]["seed"] == 3
        assert obj["config"]["replications"] == 2
        assert "wall_seconds" not in obj
        assert obj["elapsed"] == pytest.approx(400.0)
        assert obj["backend"] in ("cython", "python")
        assert obj["event_cap_exceeded"] is False

    def test_reruns_are_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, *SIM, "--output", str(a))[0] == 0
        assert run(capsys, *SIM, "--output", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_equivalent_to_flags(self, capsys, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "cycle": "0.8", "mu1": 1.0, "mu2": 1.2,
            "horizon": 200.0, "seed": 3, "reps": 2,
        }))
        code, from_config, _ = run(capsys, "simulate", "--config", str(config))
        assert code == 0
        _, from_flags, _ = run(capsys, *SIM)
        assert from_config == from_flags

    def test_flags_override_config(self, capsys, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "cycle": "0.8", "mu1": 1.0, "mu2": 1.2,
            "horizon": 200.0, "seed": 3, "reps": 2,
        }))
        code, out, _ = run(
            capsys, "simulate", "--config", str(config), "--seed", "4"
        )
        assert code == 0
        assert json.loads(out)["config"]["seed"] == 4

    def test_unknown_config_field_rejected(self, capsys, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"horizon": 100.0, "budget": 5}))
        code, _, err = run(capsys, "simulate", "--cycle", "1",
                           "--mu1", "1", "--mu2", "1", "--config", str(config))
        assert code == 1
        assert "budget" in err

    def test_missing_horizon(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--cycle", "1", "--mu1", "1", "--mu2", "1"
        )
        assert code == 1
        assert "horizon" in err

    def test_series_csv(self, capsys, tmp_path):
        series = tmp_path / "path.csv"
        code, _, _ = run(
            capsys, *SIM, "--series", str(series), "--series-points", "25",
            "--output", str(tmp_path / "out.json"),
        )
        assert code == 0
        lines = series.read_text().strip().split("\n")
        assert lines[0] == "t,x1,x2"
        assert len(lines) == 26
        assert lines[1].startswith("0,")

    def test_series_cap(self, capsys):
        code, _, err = run(capsys, *SIM, "--series-points", "200000",
                           "--series", "ignored.csv")
        assert code == 1
        assert "capped" in err

    def test_variant_flag(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--prefix", "1", "--cycle", "0",
            "--mu1", "0.5", "--mu2", "1", "--variant", "sat:3",
            "--horizon", "100", "--seed", "1",
        )
        assert code == 0
        assert json.loads(out)["spec"]["variant"] == {"saturatedN": 3}


class TestSensitivity:
    def test_sweep_over_mu2(self, capsys):
        code, out, _ = run(
            capsys, "sensitivity", "--prefix", "2", "--cycle", "0",
            "--mu1", "1", "--mu2", "1", "--axis", "mu2",
            "--grid", "0.5,1.5,3",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "mu2,status,witness"
        got = [l.split(",") for l in lines[1:]]
        assert [row[1] for row in got] == ["Stable", "Stable", "Unstable"]
        assert got[0][0] == "0.5" and got[2][0] == "3"

    def test_linear_sweep_flags(self, capsys):
        code, out, _ = run(
            capsys, "sensitivity", "--cycle", "0.5", "--mu1", "1", "--mu2", "1",
            "--axis", "mu1", "--sweep-min", "0.5", "--sweep-max", "2.5",
            "--sweep-steps", "3",
        )
        assert code == 0
        rows = [l.split(",") for l in out.strip().split("\n")[1:]]
        assert [row[0] for row in rows] == ["0.5", "1.5", "2.5"]

    def test_missing_axis(self, capsys):
        code, _, err = run(
            capsys, "sensitivity", "--cycle", "1", "--mu1", "1", "--mu2", "1"
        )
        assert code == 1
        assert "axis" in err

    def test_nonpositive_sweep_value(self, capsys):
        code, _, err = run(
            capsys, "sensitivity", "--cycle", "1", "--mu1", "1", "--mu2", "1",
            "--axis", "mu2", "--grid", "1,0,2",
        )
        assert code == 1
        assert "positive" in err


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "tandemstab.cli",
             "threshold", "--mu1", "0.9", "--mu2", "1.1"],
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["K_max"] == 10
