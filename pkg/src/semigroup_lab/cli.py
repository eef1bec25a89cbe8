"""Batch experiment driver.

Parses a JSON configuration (or assembles one from command-line flags),
dispatches to the laboratory modules, and persists CSV/JSON artifacts for the
plotting component.

Exit codes: 0 all checks passed, 1 configuration or IO error, 2 a check
failed, 3 numerical failure.  ``LAB_THREADS`` caps experiment parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import checks, closed_forms, elliptic
from .errors import SolverError
from .grids import symmetric_interval_grid

EXIT_OK, EXIT_CONFIG, EXIT_CHECK_FAILED, EXIT_NUMERICAL = 0, 1, 2, 3

# the published schema also lives in docs/config_schema.json
SCHEMA_PATH = Path(__file__).resolve().parent / "config_schema.json"

STAGE_HEADER = ["stage", "radius", "point_index", "x", "value"]
TRACE_HEADER = ["t", "x", "value"]


def _fmt(value: float) -> str:
    # 17 significant digits make regression diffs exact
    return f"{float(value):.17g}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[0] if isinstance(row[0], str) else _fmt(row[0])]
                            + [_fmt(v) for v in row[1:]])


def load_schema() -> dict:
    with open(SCHEMA_PATH) as handle:
        return json.load(handle)


class ConfigError(ValueError):
    pass


def validate_config(config: dict) -> None:
    validator = Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {first.message}")


@dataclass
class ExperimentConfig:
    kind: str
    name: str
    params: dict = field(default_factory=dict)


def _field_from_config(params: dict) -> elliptic.CoefficientField:
    name = params.get("field", "ou")
    if name in elliptic.BUILTIN_FIELDS:
        extra = params.get("field_params", {})
        kwargs = {}
        if "diffusivity" in extra:
            kwargs["diffusivity"] = extra["diffusivity"]
        return elliptic.BUILTIN_FIELDS[name](**kwargs)
    if name == "polynomial":
        extra = params.get("field_params", {})
        if "a_coeffs" not in extra or "b_coeffs" not in extra:
            raise ConfigError("polynomial fields need field_params.a_coeffs and .b_coeffs")
        return elliptic.polynomial_field(extra["a_coeffs"], extra["b_coeffs"])
    raise ConfigError(f"unknown coefficient field {name!r}")


def _parse_n(n):
    return closed_forms.INF if n == "inf" else int(n)


def run_examples_experiment(cfg: ExperimentConfig, out_dir: Path) -> dict:
    params = cfg.params
    family = params.get("family", "radial_d3")
    lam = params.get("lambda", 1.0)
    rows = []
    if family == "radial_d3":
        a_list = params.get("a_list") or [params.get("a", 1.0)]
        r_max = params.get("r_max", 3.0)
        h = params.get("h", 0.005)
        rs = h * np.arange(int(round(r_max / h)) + 1)
        for stage, a in enumerate(a_list):
            for i, r in enumerate(rs):
                rows.append((stage, a, i, r,
                             closed_forms.radial_dirichlet_resolvent(a, lam, float(r))))
    elif family == "shift_weighted":
        n_list = [_parse_n(n) for n in params.get("n_list", [1, 2, 4, 8, 16, "inf"])]
        h = params.get("h", 1.0 / 64)
        xs = h * np.arange(1, int(round(1.0 / h)) + 1)
        one = lambda s: 1.0
        for stage, n in enumerate(n_list):
            for i, x in enumerate(xs):
                rows.append((stage, 0.0 if n == closed_forms.INF else float(n), i, x,
                             closed_forms.weighted_shift_resolvent(n, lam, one, float(x))))
    elif family == "shift_halfline":
        h = params.get("h", 0.02)
        xs = h * np.arange(1, int(round(10.0 / h)) + 1)
        one = lambda s: 1.0
        for i, x in enumerate(xs):
            rows.append((0, lam, i, x, closed_forms.halfline_shift(one, float(x), lam=lam)))
    elif family == "scalar_decreasing":
        t_list = params.get("t_list", [0.0, 0.01, 0.1, 1.0])
        for n in params.get("n_list", [1, 10, 100, 1000]):
            for t in t_list:
                rows.append((float(t), float(n), closed_forms.scalar_decreasing(int(n), float(t))))
        _write_csv(out_dir / "profile.csv", TRACE_HEADER, rows)
        return {"passed": True, "files": ["profile.csv"]}
    else:
        raise ConfigError(f"unknown family {family!r}")
    _write_csv(out_dir / "profile.csv", STAGE_HEADER, rows)
    return {"passed": True, "files": ["profile.csv"]}


def run_exhaust_experiment(cfg: ExperimentConfig, out_dir: Path) -> dict:
    params = cfg.params
    coeffs = _field_from_config(params)
    lam = params.get("lambda", 1.0)
    radii = tuple(params.get("radii", (2.0, 4.0, 6.0, 8.0)))
    h = params.get("h", 0.02)
    tol = params.get("tolerance", 1e-3)
    grid = symmetric_interval_grid(max(radii), h)
    schedule = elliptic.ExhaustionSchedule(radii, grid, compact_margin=1.0)
    ones = np.ones(grid.size)
    report = elliptic.exhaustion_resolvent(coeffs, lam, ones, schedule, tol=tol)
    rows = []
    for stage, item in enumerate(report.stages):
        for i, x in enumerate(grid.points[:, 0]):
            rows.append((stage, item.radius, i, x, item.values[i]))
    _write_csv(out_dir / "stages.csv", STAGE_HEADER, rows)
    files = ["stages.csv"]
    summary = report.summary()
    passed = summary["monotone"]

    for probe in params.get("probes", []):
        if probe == "smoothing":
            t = params.get("t", 0.1)
            probes = elliptic.strong_feller_probe(
                coeffs, t, schedule,
                inputs={"halfspace": elliptic.INDICATOR_PANEL["halfspace"]},
            )
            osc = probes["halfspace"]
            rows = []
            fine = elliptic.refine(schedule)
            for stage, (sched, values) in enumerate(
                    [(schedule, osc.values_coarse), (fine, osc.values_fine)]):
                for i, x in enumerate(sched.grid.points[:, 0]):
                    rows.append((stage, sched.grid.spacing, i, x, values[i]))
            _write_csv(out_dir / "smoothing.csv", STAGE_HEADER, rows)
            files.append("smoothing.csv")
            summary["smoothing_ratio"] = osc.ratio
            summary["smoothing_verdict"] = osc.verdict
            passed = passed and osc.verdict != "discontinuous"
        elif probe == "mass_loss":
            t_list = params.get("t_list", [0.1, 0.5, 1.0])
            rows = []
            compact = schedule.compact_mask()
            worst = 0.0
            for t in t_list:
                result = elliptic.conservativeness(coeffs, float(t), schedule)
                worst = max(worst, result.mass_loss)
                for i in np.flatnonzero(compact):
                    rows.append((float(t), grid.points[i, 0], 1.0 - result.values[i]))
            _write_csv(out_dir / "mass_loss.csv", TRACE_HEADER, rows)
            files.append("mass_loss.csv")
            summary["max_mass_loss"] = worst
        elif probe == "trace":
            t_list = params.get("t_list", [0.05, 0.1, 0.5, 1.0])
            oracle = elliptic.limit_semigroup(coeffs, schedule)
            rows = []
            for t in t_list:
                values = oracle.apply(float(t), ones)
                for i, x in enumerate(grid.points[:, 0]):
                    rows.append((float(t), x, values[i]))
            _write_csv(out_dir / "trace.csv", TRACE_HEADER, rows)
            files.append("trace.csv")
    with open(out_dir / "summary.json", "w") as handle:
        json.dump(summary, handle, indent=2, sort_keys=True)
    files.append("summary.json")
    return {"passed": bool(passed), "files": files, "summary": summary}


def run_suite_experiment(cfg: ExperimentConfig, out_dir: Path) -> dict:
    seed = cfg.params.get("seed", 7)
    reports = checks.run_suite(seed=seed)
    with open(out_dir / "suite.json", "w") as handle:
        handle.write(checks.reports_to_json(reports))
    passed = checks.suite_exit_code(reports) == 0
    return {
        "passed": passed,
        "files": ["suite.json"],
        "summary": {
            "total": len(reports),
            "failed": sum(1 for r in reports if not r.passed and r.verdict != "inconclusive"),
        },
    }


_RUNNERS = {
    "examples": run_examples_experiment,
    "exhaust": run_exhaust_experiment,
    "suite": run_suite_experiment,
}


def run_experiment(cfg: ExperimentConfig, output_root: Path) -> dict:
    out_dir = output_root / cfg.name
    out_dir.mkdir(parents=True, exist_ok=True)
    result = _RUNNERS[cfg.kind](cfg, out_dir)
    report = {"name": cfg.name, "kind": cfg.kind, **result}
    with open(out_dir / "report.json", "w") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
    return report


def run_config(config: dict, output_root: Path) -> int:
    validate_config(config)
    experiments = [
        ExperimentConfig(e["kind"], e["name"],
                         {k: v for k, v in e.items() if k not in ("kind", "name")})
        for e in config["experiments"]
    ]
    if len({e.name for e in experiments}) != len(experiments):
        raise ConfigError("experiment names must be unique")
    threads = int(os.environ.get("LAB_THREADS", "1"))
    output_root.mkdir(parents=True, exist_ok=True)
    if threads > 1 and len(experiments) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda e: run_experiment(e, output_root), experiments))
    else:
        results = [run_experiment(e, output_root) for e in experiments]
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_CHECK_FAILED


def _parse_radii(text: str):
    return [float(part) for part in text.split(",") if part]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semigroup-lab",
        description="Batch driver for the semigroup laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a config file or a named experiment kind")
    run.add_argument("target", help="path to a config.json, or one of: examples, exhaust, suite")
    run.add_argument("--lambda", dest="lam", type=float, default=None)
    run.add_argument("--radii", type=_parse_radii, default=None)
    run.add_argument("--field", default=None)
    run.add_argument("--family", default=None)
    run.add_argument("--a", type=float, default=None)
    run.add_argument("--h", type=float, default=None)
    run.add_argument("--t", type=float, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default="lab_output")
    return parser


def _config_from_args(args) -> dict:
    experiment: dict = {"kind": args.target, "name": args.target}
    overrides = {
        "lambda": args.lam, "radii": args.radii, "field": args.field,
        "family": args.family, "a": args.a, "h": args.h, "t": args.t,
        "seed": args.seed,
    }
    experiment.update({k: v for k, v in overrides.items() if v is not None})
    return {"experiments": [experiment]}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.target in _RUNNERS:
            config = _config_from_args(args)
        else:
            path = Path(args.target)
            if not path.exists():
                print(f"error: config file {path} does not exist", file=sys.stderr)
                return EXIT_CONFIG
            try:
                with open(path) as handle:
                    config = json.load(handle)
            except json.JSONDecodeError as exc:
                print(f"error: {path}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
                return EXIT_CONFIG
            # flag overrides apply to every experiment in the file
            for experiment in config.get("experiments", []):
                for key, value in _config_from_args(args)["experiments"][0].items():
                    if key not in ("kind", "name"):
                        experiment.setdefault(key, value)
        return run_config(config, Path(args.out))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
