"""Manifest CLI: exit codes, diagnostics and deterministic reruns."""

import json

from lab_plots.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, main

FIGURE_NAMES = ["stages.svg", "radial.svg", "smoothing.svg", "mass_loss.svg"]


def standard_manifest(artifact_dir) -> dict:
    return {
        "figures": [
            {"kind": "monotone-convergence",
             "inputs": [str(artifact_dir / "ou" / "stages.csv")],
             "output": "stages.svg",
             "title": "exhaustion stages"},
            {"kind": "resolvent-profile",
             "inputs": [str(artifact_dir / "radial_d3" / "profile.csv")],
             "output": "radial.svg"},
            {"kind": "smoothing-oscillation",
             "inputs": [str(artifact_dir / "ou" / "smoothing.csv")],
             "output": "smoothing.svg"},
            {"kind": "mass-loss",
             "inputs": [str(artifact_dir / "ou" / "mass_loss.csv")],
             "output": "mass_loss.svg"},
        ]
    }


def write_manifest(path, payload) -> str:
    path.write_text(json.dumps(payload))
    return str(path)


class TestRenderCommand:
    def test_all_kinds_exit_zero(self, artifact_dir, tmp_path):
        manifest = write_manifest(tmp_path / "figures.json",
                                  standard_manifest(artifact_dir))
        out = tmp_path / "figs"
        assert main(["render", manifest, "--out", str(out)]) == EXIT_OK
        for name in FIGURE_NAMES:
            assert (out / name).stat().st_size > 0

    def test_rerun_byte_identical(self, artifact_dir, tmp_path):
        manifest = write_manifest(tmp_path / "figures.json",
                                  standard_manifest(artifact_dir))
        first, second = tmp_path / "run1", tmp_path / "run2"
        assert main(["render", manifest, "--out", str(first)]) == EXIT_OK
        assert main(["render", manifest, "--out", str(second)]) == EXIT_OK
        for name in FIGURE_NAMES:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_absolute_outputs_without_out_flag(self, artifact_dir, tmp_path):
        target = tmp_path / "direct.svg"
        manifest = write_manifest(tmp_path / "figures.json", {"figures": [
            {"kind": "mass-loss",
             "inputs": [str(artifact_dir / "ou" / "mass_loss.csv")],
             "output": str(target)},
        ]})
        assert main(["render", manifest]) == EXIT_OK
        assert target.is_file()


class TestManifestErrors:
    def test_missing_manifest(self, tmp_path, capsys):
        code = main(["render", str(tmp_path / "absent.json")])
        assert code == EXIT_CONFIG
        assert "absent.json" in capsys.readouterr().err

    def test_malformed_json_reports_line(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"figures": [\n  {"kind": }\n]}')
        assert main(["render", str(path)]) == EXIT_CONFIG
        assert ":2:" in capsys.readouterr().err

    def test_missing_figures_list(self, tmp_path, capsys):
        manifest = write_manifest(tmp_path / "figures.json", {"figures": []})
        assert main(["render", manifest]) == EXIT_CONFIG
        assert "figures" in capsys.readouterr().err

    def test_missing_keys_named(self, tmp_path, capsys):
        manifest = write_manifest(tmp_path / "figures.json", {"figures": [
            {"kind": "mass-loss"},
        ]})
        assert main(["render", manifest]) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "inputs" in err and "output" in err

    def test_unknown_kind(self, tmp_path, capsys):
        manifest = write_manifest(tmp_path / "figures.json", {"figures": [
            {"kind": "pie", "inputs": ["a.csv"], "output": "out.svg"},
        ]})
        assert main(["render", manifest]) == EXIT_CONFIG
        assert "unknown figure kind" in capsys.readouterr().err


class TestInputErrors:
    def test_missing_csv_names_file(self, tmp_path, capsys):
        manifest = write_manifest(tmp_path / "figures.json", {"figures": [
            {"kind": "mass-loss", "inputs": [str(tmp_path / "ghost.csv")],
             "output": str(tmp_path / "out.svg")},
        ]})
        assert main(["render", manifest]) == EXIT_INPUT
        assert "ghost.csv" in capsys.readouterr().err

    def test_empty_series_errors(self, tmp_path, capsys):
        empty = tmp_path / "hollow.csv"
        empty.write_text("t,x,value\n")
        manifest = write_manifest(tmp_path / "figures.json", {"figures": [
            {"kind": "mass-loss", "inputs": [str(empty)],
             "output": str(tmp_path / "out.svg")},
        ]})
        assert main(["render", manifest]) == EXIT_INPUT
        assert "hollow.csv" in capsys.readouterr().err
