import csv
import io
import json
import math
import subprocess
import sys

import pytest

from spinfall import cli
from spinfall.errors import ConfigError
from spinfall.verify import run_verify

SMALL = ["--mass", "1", "--alpha0", "1", "--r-start", "6", "--r-end", "2.2", "--steps", "50"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestConfig:
    def test_file_and_flag_override(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# infall\nmass = 2\nalpha0 = 0.5\nr_start = 8  # in M\nr-end = 3\nsteps = 10\n")
        args = cli.build_parser().parse_args(["--config", str(path), "--alpha0", "1.5"])
        config = cli.config_from_args(args)
        assert (config.mass, config.alpha0, config.r_start, config.r_end, config.n_steps) == (2.0, 1.5, 8.0, 3.0, 10)

    def test_sweep_values_in_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("mode = sweep\nsweep_axis = alpha0\nsweep_values = 0.5, 1.0 ,2\n")
        config = cli.config_from_args(cli.build_parser().parse_args(["--config", str(path)]))
        assert config.sweep_values == [0.5, 1.0, 2.0]

    @pytest.mark.parametrize(
        "text",
        ["colour = blue\n", "mass = heavy\n", "just a line\n", "steps = 2.5\n", "sweep_values = a,b\n"],
    )
    def test_bad_file(self, tmp_path, text):
        path = tmp_path / "bad.cfg"
        path.write_text(text)
        with pytest.raises(ConfigError):
            cli.read_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            cli.read_config_file(tmp_path / "nope.cfg")

    @pytest.mark.parametrize(
        "kw",
        [
            dict(r_start=3.0, r_end=3.0),
            dict(r_start=3.0, r_end=4.0),
            dict(r_end=2.0),
            dict(alpha0=0.0),
            dict(mass=-1.0),
            dict(n_steps=1),
            dict(workers=0),
            dict(mode="sweep"),
            dict(mode="sweep", sweep_axis="alpha0"),
            dict(mode="sweep", sweep_axis="r_start", sweep_values=[1.0]),
            dict(mode="sweep", sweep_axis="colour", sweep_values=[1.0]),
            dict(mode="replay"),
            dict(format="xml"),
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ConfigError):
            cli.RunConfig(**kw).validate()

    def test_verify_skips_trajectory_checks(self):
        cli.RunConfig(mode="verify", r_start=1.0, r_end=5.0).validate()


class TestExitCodes:
    def test_zero_length_is_config_error(self, capsys, caplog):
        code, out, _ = run(["--r-start", "4", "--r-end", "4"], capsys)
        assert code == cli.EXIT_CONFIG and out == ""
        assert "r_start" in caplog.text

    def test_numeric_failure_names_sample(self, capsys, caplog):
        # tiny rapidity far out: the map grows without bound and overflows
        code, out, _ = run(
            ["--alpha0", "2e-6", "--r-start", "1000000", "--r-end", "999990", "--steps", "1000"], capsys
        )
        assert code == cli.EXIT_NUMERIC
        assert "sample" in caplog.text and out == ""

    def test_verify_failure_exit(self, capsys, monkeypatch):
        real = cli.run_verify
        monkeypatch.setattr(cli, "run_verify", lambda mass: real(mass, n_points=40, tetrad_perturbation=1e-4))
        code, _, err = run(["--mode", "verify"], capsys)
        assert code == cli.EXIT_VERIFY
        assert "FAIL  tetrad_metric_schwarzschild" in err

    def test_verify_passes(self, capsys, tmp_path):
        out_path = tmp_path / "verify.json"
        code, _, err = run(["--mode", "verify", "--format", "json", "--output", str(out_path)], capsys)
        assert code == cli.EXIT_OK
        doc = json.loads(out_path.read_text())
        checks = {c["name"]: c for c in doc["checks"]}
        assert all(c["passed"] for c in checks.values())
        assert checks["printed_one_form_3_2,phi"]["informational"]
        assert checks["closed_form_vs_accumulate_distance"]["informational"]
        assert "INFO" in err


class TestVerifyHook:
    def test_perturbation_fails_compatibility_only(self):
        checks = {c.name: c for c in run_verify(n_points=40, tetrad_perturbation=1e-4)}
        assert not checks["tetrad_metric_schwarzschild"].passed
        assert not checks["tetrad_metric_kruskal"].passed
        assert checks["tetrad_duality_schwarzschild"].passed
        assert checks["coordinate_round_trip"].passed


class TestTrajectory:
    def test_csv_layout(self, capsys):
        code, out, _ = run(SMALL, capsys)
        assert code == 0
        rows = parse_csv(out)
        assert list(rows[0]) == list(cli.COLUMNS)
        assert len(rows) == 52 and rows[-1]["index"] == "summary"
        assert [r["index"] for r in rows[:3]] == ["0", "1", "2"]
        first = rows[0]
        assert float(first["D00"]) == 1.0 and float(first["unitarity_dev"]) == 0.0
        assert float(first["r_over_M"]) == 6.0

    def test_mass_scaled_columns(self, capsys):
        _, out, _ = run(["--mass", "2", "--r-start", "6", "--r-end", "3", "--steps", "10"], capsys)
        row = parse_csv(out)[5]
        assert float(row["r"]) == pytest.approx(2 * float(row["r_over_M"]))
        assert float(row["t"]) == pytest.approx(2 * float(row["t_over_M"]))

    def test_csv_json_agree(self, capsys, tmp_path):
        csv_path, json_path = tmp_path / "a.csv", tmp_path / "a.json"
        assert cli.main(SMALL + ["--output", str(csv_path)]) == 0
        assert cli.main(SMALL + ["--output", str(json_path), "--format", "json"]) == 0
        rows = parse_csv(csv_path.read_text())
        doc = json.loads(json_path.read_text())
        assert doc["config"]["n_steps"] == 50
        assert len(doc["samples"]) == len(rows) - 1
        for row, sample in zip(rows, doc["samples"] + [doc["summary"]]):
            for col in cli.COLUMNS:
                if col == "index":
                    assert row[col] == str(sample[col])
                else:
                    assert float(row[col]) == sample[col]

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(SMALL + ["--output", str(a)]) == 0
        assert cli.main(SMALL + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_summary_extras(self):
        rows, summary = cli.run_trajectory(cli.RunConfig(n_steps=200))
        assert summary["K"] == pytest.approx(math.tanh(0.5))
        assert summary["closed_form_distance"] > 0
        assert summary["unitarity_dev"] > 0
        assert summary["r"] == rows[-1]["r"]

    def test_near_horizon_summary(self):
        _, summary = cli.run_trajectory(cli.RunConfig(n_steps=10_000))
        assert summary["unitarity_dev"] == pytest.approx(0.957, abs=1e-3)
        assert summary["trace_out"] > 1.0
        assert summary["bitflip_distance"] > 0


class TestSweep:
    def test_rows_ordered_by_value(self, capsys):
        argv = ["--mode", "sweep", "--sweep-axis", "alpha0", "--sweep-values", "2,0.5,1", "--steps", "40"]
        code, out, _ = run(argv + ["--workers", "2"], capsys)
        assert code == 0
        rows = parse_csv(out)
        assert [float(r["sweep_value"]) for r in rows] == [0.5, 1.0, 2.0]
        code, serial, _ = run(argv, capsys)
        assert serial == out

    def test_sweep_matches_trajectory(self, capsys):
        _, out, _ = run(["--mode", "sweep", "--sweep-axis", "n_steps", "--sweep-values", "30"], capsys)
        row = parse_csv(out)[0]
        _, summary = cli.run_trajectory(cli.RunConfig(n_steps=30))
        assert float(row["D01"]) == summary["D01"]
        assert float(row["entropy_paper"]) == summary["entropy_paper"]

    def test_sweep_json(self, capsys):
        code, out, _ = run(
            ["--mode", "sweep", "--sweep-axis", "mass", "--sweep-values", "1,2", "--steps", "20", "--format", "json"],
            capsys,
        )
        doc = json.loads(out)
        assert code == 0 and [r["sweep_value"] for r in doc["rows"]] == [1.0, 2.0]
        # geometric units: radii are given in M, so the map is mass independent
        assert doc["rows"][0]["D01"] == pytest.approx(doc["rows"][1]["D01"], rel=1e-12)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "spinfall", "--r-start", "4", "--r-end", "4"], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert "configuration error" in proc.stderr
