"""Renderer-level tests against driver-produced CSVs."""

import pytest

from lab_plots.figures import (
    FigureError,
    FigureSpec,
    read_stage_series,
    read_trace_series,
    render,
)


class TestSpecValidation:
    def test_unknown_kind_rejected(self):
        with pytest.raises(FigureError, match="unknown figure kind"):
            FigureSpec("volcano", ("a.csv",), "out.svg")

    def test_empty_inputs_rejected(self):
        with pytest.raises(FigureError, match="at least one input"):
            FigureSpec("mass-loss", (), "out.svg")


class TestReaders:
    def test_missing_file_names_path(self, tmp_path):
        missing = tmp_path / "nope.csv"
        with pytest.raises(FigureError, match="nope.csv"):
            read_stage_series(str(missing))

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(FigureError, match="empty CSV"):
            read_stage_series(str(path))

    def test_header_only_rejected(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("stage,radius,point_index,x,value\n")
        with pytest.raises(FigureError, match="no data rows"):
            read_stage_series(str(path))

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(FigureError, match="bad header"):
            read_trace_series(str(path))

    def test_malformed_value_rejected(self, tmp_path):
        path = tmp_path / "mangled.csv"
        path.write_text("t,x,value\n0.1,0.0,oops\n")
        with pytest.raises(FigureError, match="malformed row"):
            read_trace_series(str(path))

    def test_stage_series_sorted(self, artifact_dir):
        series = read_stage_series(str(artifact_dir / "ou" / "stages.csv"))
        assert [item.stage for item in series] == [0, 1, 2]
        assert [item.radius for item in series] == [2.0, 3.0, 4.0]
        for item in series:
            assert item.x == tuple(sorted(item.x))

    def test_trace_series_sorted(self, artifact_dir):
        series = read_trace_series(str(artifact_dir / "ou" / "mass_loss.csv"))
        assert [t for t, _, _ in series] == sorted(t for t, _, _ in series)
        assert all(len(xs) == len(vals) > 0 for _, xs, vals in series)


class TestRadialProfileData:
    """The rendered radial curves increase as the obstacle shrinks and
    approach 1/lambda away from it."""

    def test_curves_increase_and_approach_limit(self, artifact_dir):
        series = read_stage_series(str(artifact_dir / "radial_d3" / "profile.csv"))
        assert [item.radius for item in series] == [1.0, 0.1, 0.01]
        for lower, upper in zip(series, series[1:]):
            assert all(b >= a - 1e-12
                       for a, b in zip(lower.values, upper.values))
        assert series[-1].values[-1] > 0.95


class TestRendering:
    def test_all_four_kinds_render(self, artifact_dir, out_dir):
        specs = [
            FigureSpec("monotone-convergence",
                       (str(artifact_dir / "ou" / "stages.csv"),),
                       str(out_dir / "stages.svg")),
            FigureSpec("resolvent-profile",
                       (str(artifact_dir / "radial_d3" / "profile.csv"),),
                       str(out_dir / "radial.svg")),
            FigureSpec("smoothing-oscillation",
                       (str(artifact_dir / "ou" / "smoothing.csv"),),
                       str(out_dir / "smoothing.svg")),
            FigureSpec("mass-loss",
                       (str(artifact_dir / "ou" / "mass_loss.csv"),),
                       str(out_dir / "mass_loss.svg")),
        ]
        for spec in specs:
            render(spec)
        for name in ("stages.svg", "radial.svg", "smoothing.svg", "mass_loss.svg"):
            target = out_dir / name
            assert target.is_file() and target.stat().st_size > 0

    def test_shift_profile_renders(self, artifact_dir, out_dir):
        spec = FigureSpec("resolvent-profile",
                          (str(artifact_dir / "shift_weighted" / "profile.csv"),),
                          str(out_dir / "shift.svg"))
        render(spec)
        assert (out_dir / "shift.svg").stat().st_size > 0

    def test_smoothing_ratio_annotation(self, artifact_dir, out_dir):
        spec = FigureSpec("smoothing-oscillation",
                          (str(artifact_dir / "ou" / "smoothing.csv"),),
                          str(out_dir / "smoothing.svg"))
        ratio = render(spec)
        assert 0.0 < ratio <= 0.7

    def test_png_output(self, artifact_dir, out_dir):
        spec = FigureSpec("mass-loss",
                          (str(artifact_dir / "ou" / "mass_loss.csv"),),
                          str(out_dir / "mass_loss.png"))
        render(spec)
        assert (out_dir / "mass_loss.png").stat().st_size > 0

    def test_smoothing_needs_two_stages(self, artifact_dir, out_dir, tmp_path):
        source = (artifact_dir / "ou" / "smoothing.csv").read_text().splitlines()
        truncated = tmp_path / "one_stage.csv"
        truncated.write_text("\n".join(
            line for line in source
            if line.startswith("stage") or line.startswith("0,")) + "\n")
        spec = FigureSpec("smoothing-oscillation", (str(truncated),),
                          str(out_dir / "bad.svg"))
        with pytest.raises(FigureError, match="two stages"):
            render(spec)

    def test_deterministic_bytes(self, artifact_dir, out_dir):
        for kind, csv_name, source in [
            ("monotone-convergence", "stages.csv", "ou"),
            ("smoothing-oscillation", "smoothing.csv", "ou"),
            ("mass-loss", "mass_loss.csv", "ou"),
            ("resolvent-profile", "profile.csv", "radial_d3"),
        ]:
            csv_path = str(artifact_dir / source / csv_name)
            first = out_dir / f"{kind}-a.svg"
            second = out_dir / f"{kind}-b.svg"
            render(FigureSpec(kind, (csv_path,), str(first)))
            render(FigureSpec(kind, (csv_path,), str(second)))
            assert first.read_bytes() == second.read_bytes()
