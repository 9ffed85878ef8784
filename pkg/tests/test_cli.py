import json
import subprocess
import sys

import numpy as np
import pytest

from lacunary.cli import (
    ExperimentConfig,
    UsageError,
    main,
    parse_n_grid,
    parse_range,
    parse_window,
    report_schema_version,
    to_json,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_body(text):
    lines = text.strip().splitlines()
    assert lines[0].startswith("# ") and lines[-1].startswith("# ")
    return json.loads(lines[0][2:]), lines[1:-1], json.loads(lines[-1][2:])


class TestParsing:
    def test_n_grid(self):
        assert parse_n_grid("2^4,32, 64") == [16, 32, 64]
        with pytest.raises(UsageError):
            parse_n_grid("0")

    def test_range(self):
        assert np.allclose(parse_range("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])
        assert parse_window("-0.5:0.5") == (-0.5, 0.5)

    def test_json(self):
        assert to_json({"a": [1, 0.1, float("nan"), None, True]}) == '{"a": [1, 0.10000000000000001, "NaN", null, true]}'

    def test_schema(self):
        assert report_schema_version() == "1.0.0"

    def test_config_roundtrip(self):
        cfg = ExperimentConfig(subcommand="llt", params={"grid": np.arange(3.0)})
        assert cfg.as_dict()["params"]["grid"] == [0.0, 1.0, 2.0]


class TestCommands:
    def test_count_json(self, capsys):
        code, out, _ = run_cli(capsys, "count-solutions", "--seq", "pow:3", "--n", "12", "--l", "2", "--r", "2")
        assert code == 0
        body = json.loads(out.strip().splitlines()[-1])
        for key in ("params", "max_count", "bound", "verdict", "top_buckets"):
            assert key in body
        assert body["verdict"] is True

    def test_count_xor(self, capsys):
        code, out, _ = run_cli(capsys, "count-solutions", "--seq", "pow:2", "--n", "12", "--l", "3", "--mode", "xor")
        body = json.loads(out.strip().splitlines()[-1])
        assert code == 0 and body["zero_count"] == 0

    def test_budget_exit(self, capsys):
        code, _, err = run_cli(capsys, "count-solutions", "--seq", "pow:2", "--n", "40", "--l", "6", "--r", "3",
                               "--budget", "1000")
        assert code == 1 and "budget" in err

    def test_usage_errors(self, capsys):
        assert run_cli(capsys, "count-solutions", "--seq", "nope:3", "--n", "4", "--l", "2")[0] == 2
        assert run_cli(capsys, "llt", "--bogus")[0] == 2
        assert run_cli(capsys)[0] == 2

    def test_unwritable(self, capsys, tmp_path):
        bad = tmp_path / "missing" / "out.csv"
        code, _, err = run_cli(capsys, "mgf", "--kind", "bernoulli", "--n", "16", "--out", str(bad))
        assert code == 2 and "error" in err

    def test_mgf_csv(self, capsys):
        code, out, _ = run_cli(capsys, "mgf", "--kind", "bernoulli", "--n", "64,256", "--grid", "-1:1:0.5")
        cfg, rows, summary = csv_body(out)
        assert code == 0 and cfg["config"]["subcommand"] == "mgf"
        assert len(rows) == 1 + 2 * 5
        assert "sup_abs_error" in summary["summary"]

    def test_llt_walsh_pass(self, capsys):
        code, out, _ = run_cli(capsys, "llt", "--family", "walsh", "--coeffs", "flat:0.25", "--n-grid", "2^12,2^16",
                               "--tol", "0.05")
        assert code == 0

    def test_llt_fail_exit(self, capsys):
        code, _, _ = run_cli(capsys, "llt", "--family", "walsh", "--coeffs", "flat:0.25", "--n-grid", "2^4",
                             "--tol", "1e-9")
        assert code == 1

    def test_global_flags_after_subcommand(self, capsys, tmp_path):
        out = tmp_path / "k.jsonl"
        code, _, _ = run_cli(capsys, "kolmogorov", "--family", "walsh", "--coeffs", "flat:0.25",
                             "--n-grid", "2^6,2^8,2^10", "--format", "json-lines", "--out", str(out))
        assert code == 0
        lines = [json.loads(s) for s in out.read_text().splitlines()]
        assert "config" in lines[0] and "summary" in lines[-1]

    def test_byte_identical(self, tmp_path, capsys):
        args = ["tails", "--family", "bernoulli", "--n-grid", "16,64", "--y", "1.0", "--threads", "2"]
        out = tmp_path / "a.csv"
        assert main(args + ["--out", str(out)]) == 0
        first = out.read_bytes()
        assert main(["--out", str(out)] + args[:-2]) == 0
        # threads is recorded in the config line; the data rows must not change
        assert out.read_bytes() != first
        assert out.read_bytes().splitlines()[1:] == first.splitlines()[1:]
        assert main(["--out", str(out), "--threads", "2"] + args[:-2]) == 0
        assert out.read_bytes() == first

    def test_simulate_trig_large_n(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "--family", "trig", "--n-grid", "256", "--samples", "16384")
        _, rows, _ = csv_body(out)
        variance = float(rows[-1].split(",")[-1])
        assert code == 0 and variance == pytest.approx(0.5, rel=0.05)

    def test_martingale(self, capsys):
        code, out, _ = run_cli(capsys, "martingale-check", "--f", "bernoulli", "--r", "3", "--n", "4",
                               "--depth", "14")
        assert code == 0
        assert json.loads(out.strip().splitlines()[-1])["verdict"] is True

    def test_zone(self, capsys):
        code, out, _ = run_cli(capsys, "zone-check", "--family", "walsh", "--coeffs", "flat:0.25",
                               "--n-grid", "2^8,2^10", "--D", "0.5")
        assert code == 0

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "lacunary.cli", "--version"], capture_output=True, text=True)
        assert proc.returncode == 0 and "1.0.0" in proc.stdout
