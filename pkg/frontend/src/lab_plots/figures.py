"""The four standard figure kinds, rendered from the driver's CSV artifacts.

Each renderer consumes one CSV file in one of the two published layouts:

* stage series, header ``stage,radius,point_index,x,value`` (exhaustion
  stages, closed-form profiles, smoothing probes);
* traces, header ``t,x,value`` (semigroup traces, mass-loss curves).

Rendering is deterministic: fixed figure geometry, a fixed SVG hash salt and
no embedded timestamps, so identical CSVs yield byte-identical images.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

STAGE_HEADER = ["stage", "radius", "point_index", "x", "value"]
TRACE_HEADER = ["t", "x", "value"]

FIGSIZE = (6.4, 4.0)
DPI = 100


class FigureError(ValueError):
    """Raised for missing inputs, bad headers or empty series."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise FigureError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {sorted(FIGURE_KINDS)}")
        if not self.inputs:
            raise FigureError(f"figure {self.kind!r} needs at least one input CSV")


@dataclass(frozen=True)
class StageSeries:
    """One curve of a stage-series CSV, points ordered by point_index."""

    stage: int
    radius: float
    x: tuple = field(repr=False)
    values: tuple = field(repr=False)

    @property
    def max_jump(self) -> float:
        """Largest |value step| between consecutive points."""
        return max((abs(b - a) for a, b in zip(self.values, self.values[1:])),
                   default=0.0)


def _read_rows(path: str, header: list[str]) -> list[dict]:
    csv_path = Path(path)
    if not csv_path.is_file():
        raise FigureError(f"input CSV not found: {path}")
    with open(csv_path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            found = next(reader)
        except StopIteration:
            raise FigureError(f"empty CSV: {path}") from None
        if found != header:
            raise FigureError(f"bad header in {path}: expected {header}, got {found}")
        rows = [dict(zip(header, row)) for row in reader]
    if not rows:
        raise FigureError(f"no data rows in {path}")
    return rows


def read_stage_series(path: str) -> list[StageSeries]:
    """Parse a stage-series CSV into per-stage curves, stages ascending."""
    rows = _read_rows(path, STAGE_HEADER)
    curves = {}
    for row in rows:
        try:
            stage = int(row["stage"])
            point = (int(row["point_index"]), float(row["x"]), float(row["value"]))
            radius = float(row["radius"])
        except ValueError as exc:
            raise FigureError(f"malformed row in {path}: {exc}") from None
        curves.setdefault((stage, radius), []).append(point)
    out = []
    for (stage, radius), points in sorted(curves.items()):
        points.sort()
        out.append(StageSeries(stage, radius,
                               tuple(x for _, x, _ in points),
                               tuple(v for _, _, v in points)))
    return out


def read_trace_series(path: str) -> list[tuple[float, tuple, tuple]]:
    """Parse a trace CSV into (t, x, values) triples, times ascending."""
    rows = _read_rows(path, TRACE_HEADER)
    curves = {}
    for row in rows:
        try:
            curves.setdefault(float(row["t"]), []).append(
                (float(row["x"]), float(row["value"])))
        except ValueError as exc:
            raise FigureError(f"malformed row in {path}: {exc}") from None
    out = []
    for t, points in sorted(curves.items()):
        points.sort()
        out.append((t, tuple(x for x, _ in points), tuple(v for _, v in points)))
    return out


def _new_figure(title: str):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if title:
        ax.set_title(title)
    ax.set_xlabel("x")
    return fig, ax


def _save(fig, output: str) -> None:
    out_path = Path(output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out_path.suffix == ".svg" else None
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)


def render_monotone_convergence(spec: FigureSpec) -> None:
    """Stage curves in increasing order with the limit stage overlaid."""
    series = read_stage_series(spec.inputs[0])
    fig, ax = _new_figure(spec.title or "monotone stage convergence")
    for item in series[:-1]:
        ax.plot(item.x, item.values, linewidth=1.0,
                label=f"stage {item.stage} (r={item.radius:g})")
    limit = series[-1]
    ax.plot(limit.x, limit.values, "k--", linewidth=1.6,
            label=f"limit (r={limit.radius:g})")
    ax.set_ylabel("value")
    ax.legend(loc="lower center", fontsize=8)
    _save(fig, spec.output)


def render_resolvent_profile(spec: FigureSpec) -> None:
    """Resolvent profiles per stage; the per-stage radius parameter marks
    the discontinuity point when it falls inside the plotted range."""
    series = read_stage_series(spec.inputs[0])
    fig, ax = _new_figure(spec.title or "resolvent profile")
    x_lo = min(min(item.x) for item in series)
    x_hi = max(max(item.x) for item in series)
    for item in series:
        line, = ax.plot(item.x, item.values, linewidth=1.2,
                        label=f"a={item.radius:g}")
        if x_lo < item.radius < x_hi:
            ax.axvline(item.radius, color=line.get_color(),
                       linestyle=":", linewidth=0.8)
    ax.set_ylabel("resolvent of 1")
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, spec.output)


def render_smoothing_oscillation(spec: FigureSpec) -> float:
    """Smoothing probe curves at two grid resolutions with the ratio of
    their largest adjacent jumps annotated; returns the ratio."""
    series = read_stage_series(spec.inputs[0])
    if len(series) < 2:
        raise FigureError(f"smoothing CSV {spec.inputs[0]} needs at least "
                          f"two stages, got {len(series)}")
    coarse, fine = series[0], series[-1]
    ratio = 0.0 if coarse.max_jump == 0.0 else fine.max_jump / coarse.max_jump
    fig, ax = _new_figure(spec.title or "smoothing under refinement")
    for item, style in ((coarse, "-"), (fine, "--")):
        ax.plot(item.x, item.values, style, linewidth=1.2,
                label=f"h={item.radius:g}")
    ax.set_ylabel("semigroup of indicator")
    ax.annotate(f"oscillation ratio = {ratio:.3f}", xy=(0.03, 0.94),
                xycoords="axes fraction", fontsize=9)
    ax.legend(loc="lower right", fontsize=8)
    _save(fig, spec.output)
    return ratio


def render_mass_loss(spec: FigureSpec) -> None:
    """Pointwise mass loss 1 - T(t)1(x), one curve per time."""
    series = read_trace_series(spec.inputs[0])
    fig, ax = _new_figure(spec.title or "mass loss")
    for t, xs, values in series:
        ax.plot(xs, values, linewidth=1.2, label=f"t={t:g}")
    ax.set_ylabel("1 - mass")
    ax.legend(loc="upper center", fontsize=8)
    _save(fig, spec.output)


FIGURE_KINDS = {
    "monotone-convergence": render_monotone_convergence,
    "resolvent-profile": render_resolvent_profile,
    "smoothing-oscillation": render_smoothing_oscillation,
    "mass-loss": render_mass_loss,
}


def render(spec: FigureSpec):
    """Render one figure; returns the renderer's annotation value, if any."""
    plt.rcParams["svg.hashsalt"] = "lab-plots"
    return FIGURE_KINDS[spec.kind](spec)
