import csv
import json
import math

import pytest

from semigroup_lab.cli import (EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK,
                               ConfigError, STAGE_HEADER, TRACE_HEADER, main,
                               validate_config)


def write_config(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


class TestConfigValidation:
    def test_minimal_config_ok(self):
        validate_config({"experiments": [{"kind": "examples", "name": "e"}]})

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError) as err:
            validate_config({"experiments": [{"kind": "nope", "name": "e"}]})
        assert "kind" in str(err.value)

    def test_missing_experiments_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({})

    def test_bad_probe_rejected(self):
        with pytest.raises(ConfigError):
            validate_config({"experiments": [
                {"kind": "exhaust", "name": "e", "probes": ["bogus"]}]})


class TestExitCodes:
    def test_missing_file(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "none.json"), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert "does not exist" in capsys.readouterr().err

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{\n  broken\n}")
        code = main(["run", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG
        assert ":2:" in capsys.readouterr().err

    def test_invalid_schema(self, tmp_path, capsys):
        path = write_config(tmp_path / "c.json",
                            {"experiments": [{"kind": "wrong", "name": "e"}]})
        assert main(["run", path, "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_duplicate_names(self, tmp_path):
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "examples", "name": "e"},
            {"kind": "examples", "name": "e"},
        ]})
        assert main(["run", path, "--out", str(tmp_path / "o")]) == EXIT_CONFIG

    def test_examples_shortcut_runs_green(self, tmp_path):
        code = main(["run", "examples", "--family", "radial_d3", "--a", "1.0",
                     "--h", "0.1", "--out", str(tmp_path / "o")])
        assert code == EXIT_OK
        assert (tmp_path / "o" / "examples" / "profile.csv").exists()
        assert (tmp_path / "o" / "examples" / "report.json").exists()


class TestArtifacts:
    def test_profile_csv_contract(self, tmp_path):
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "examples", "name": "radial", "family": "radial_d3",
             "a_list": [1.0, 0.5], "r_max": 2.0, "h": 0.5, "lambda": 1.0},
        ]})
        assert main(["run", path, "--out", str(tmp_path / "o")]) == EXIT_OK
        rows = read_csv(tmp_path / "o" / "radial" / "profile.csv")
        assert rows[0] == STAGE_HEADER
        assert len(rows) == 1 + 2 * 5
        # frozen closed-form value at (a=1, lam=1, r=2)
        target = [r for r in rows[1:] if r[1] == "1" and float(r[3]) == 2.0]
        assert float(target[0][4]) == pytest.approx(0.8160603, abs=1e-6)

    def test_values_have_full_precision(self, tmp_path):
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "examples", "name": "radial", "a": 1.0, "r_max": 2.0,
             "h": 0.5, "family": "radial_d3"},
        ]})
        main(["run", path, "--out", str(tmp_path / "o")])
        rows = read_csv(tmp_path / "o" / "radial" / "profile.csv")
        value = [r[4] for r in rows[1:] if float(r[3]) == 2.0][0]
        expected = (1.0 - 0.5 * math.exp(-1.0))
        assert value == f"{expected:.17g}"

    def test_exhaust_artifacts(self, tmp_path):
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "exhaust", "name": "ou", "field": "ou",
             "radii": [2.0, 3.0], "h": 0.25, "lambda": 1.0,
             "probes": ["smoothing", "mass_loss", "trace"],
             "t": 0.1, "t_list": [0.1, 0.5]},
        ]})
        assert main(["run", path, "--out", str(tmp_path / "o")]) == EXIT_OK
        out = tmp_path / "o" / "ou"
        assert read_csv(out / "stages.csv")[0] == STAGE_HEADER
        assert read_csv(out / "smoothing.csv")[0] == STAGE_HEADER
        assert read_csv(out / "mass_loss.csv")[0] == TRACE_HEADER
        assert read_csv(out / "trace.csv")[0] == TRACE_HEADER
        summary = json.loads((out / "summary.json").read_text())
        assert summary["monotone"] is True
        assert summary["smoothing_verdict"] == "continuous"
        report = json.loads((out / "report.json").read_text())
        assert report["passed"] is True
        assert set(report["files"]) == {"stages.csv", "smoothing.csv",
                                        "mass_loss.csv", "trace.csv",
                                        "summary.json"}

    def test_reruns_are_byte_identical(self, tmp_path):
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "exhaust", "name": "ou", "field": "ou",
             "radii": [2.0, 3.0], "h": 0.25, "probes": ["trace"]},
        ]})
        main(["run", path, "--out", str(tmp_path / "a")])
        main(["run", path, "--out", str(tmp_path / "b")])
        for name in ("stages.csv", "trace.csv", "summary.json", "report.json"):
            assert (tmp_path / "a" / "ou" / name).read_bytes() == \
                (tmp_path / "b" / "ou" / name).read_bytes()

    def test_threaded_run_matches_serial(self, tmp_path, monkeypatch):
        payload = {"experiments": [
            {"kind": "examples", "name": "r1", "family": "radial_d3",
             "a": 1.0, "r_max": 2.0, "h": 0.5},
            {"kind": "examples", "name": "r2", "family": "radial_d3",
             "a": 0.5, "r_max": 2.0, "h": 0.5},
        ]}
        path = write_config(tmp_path / "c.json", payload)
        main(["run", path, "--out", str(tmp_path / "serial")])
        monkeypatch.setenv("LAB_THREADS", "2")
        main(["run", path, "--out", str(tmp_path / "par")])
        for name in ("r1", "r2"):
            assert (tmp_path / "serial" / name / "profile.csv").read_bytes() == \
                (tmp_path / "par" / name / "profile.csv").read_bytes()

    def test_scalar_family_trace(self, tmp_path):
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "examples", "name": "scalar", "family": "scalar_decreasing",
             "n_list": [1, 10], "t_list": [0.0, 0.5]},
        ]})
        assert main(["run", path, "--out", str(tmp_path / "o")]) == EXIT_OK
        rows = read_csv(tmp_path / "o" / "scalar" / "profile.csv")
        assert rows[0] == TRACE_HEADER
        assert float(rows[1][2]) == 1.0


class TestFailurePropagation:
    def test_smoothing_failure_yields_check_exit(self, tmp_path, monkeypatch):
        from semigroup_lab import cli, elliptic

        def fake_probe(coeffs, t, schedule, inputs=None):
            osc = elliptic.OscillationReport(
                1.0, 0.99, "discontinuous",
                values_coarse=__import__("numpy").zeros(schedule.grid.size),
                values_fine=__import__("numpy").zeros(
                    elliptic.refine(schedule).grid.size),
            )
            return {"halfspace": osc}

        monkeypatch.setattr(cli.elliptic, "strong_feller_probe", fake_probe)
        path = write_config(tmp_path / "c.json", {"experiments": [
            {"kind": "exhaust", "name": "ou", "field": "ou",
             "radii": [2.0, 3.0], "h": 0.25, "probes": ["smoothing"]},
        ]})
        assert main(["run", path, "--out", str(tmp_path / "o")]) == EXIT_CHECK_FAILED
