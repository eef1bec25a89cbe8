"""Report-valued invariant checks over generator/semigroup pairs.

Each check is deterministic and returns a CheckReport whose pass flag is
recomputable from the residual and the published tolerance.  Probes that
operationalize continuity use refinement bands: ratio <= 0.7 passes,
ratio >= 0.9 fails, and the gap in between yields "inconclusive".
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .elliptic import (CONTINUOUS_BAND, DISCONTINUOUS_BAND, ExhaustionSchedule)
from .engine import GeneratorMatrix, ResolventOracle, SemigroupOracle, post_widder
from .kernels import DualVector, KernelMatrix, apply, apply_adjoint

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    worst_residual: float
    location: tuple | None
    tolerance: float
    verdict: str = PASS
    notes: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["location"] is not None:
            out["location"] = list(out["location"])
        return out


def _report(name, residual, tolerance, location=None, notes="") -> CheckReport:
    passed = residual <= tolerance
    return CheckReport(name, passed, float(residual), location, float(tolerance),
                       PASS if passed else FAIL, notes)


def _test_panel(n: int) -> list:
    """Deterministic input functions: constants, a half-space indicator and a
    unit spike."""
    ones = np.ones(n)
    half = (np.arange(n) >= n // 2).astype(float)
    spike = np.zeros(n)
    spike[n // 2] = 1.0
    return [ones, half, spike]


def semigroup_law_check(oracle: SemigroupOracle, t_list, tol: float = 1e-9) -> CheckReport:
    """Residual of T(t + s) f = T(t) T(s) f over pairs from t_list."""
    worst, loc = 0.0, None
    for t in t_list:
        for s in t_list:
            for k, f in enumerate(_test_panel(oracle.generator.size)):
                lhs = oracle.apply(t + s, f)
                rhs = oracle.apply(t, oracle.apply(s, f))
                res = float(np.abs(lhs - rhs).max(initial=0.0))
                if res > worst:
                    worst, loc = res, (float(t), float(s), k)
    return _report("semigroup_law", worst, tol, loc)


def resolvent_identity_check(oracle: ResolventOracle, lam_list, tol: float = 1e-8) -> CheckReport:
    """Residual of R(lam) - R(mu) = (mu - lam) R(lam) R(mu) over pairs."""
    worst, loc = 0.0, None
    for lam in lam_list:
        for mu in lam_list:
            for k, f in enumerate(_test_panel(oracle.generator.size)):
                lhs = oracle.apply(lam, f) - oracle.apply(mu, f)
                rhs = (mu - lam) * oracle.apply(lam, oracle.apply(mu, f))
                res = float(np.abs(lhs - rhs).max(initial=0.0))
                if res > worst:
                    worst, loc = res, (float(lam), float(mu), k)
    return _report("resolvent_identity", worst, tol, loc)


def positivity_contraction_check(semigroup: SemigroupOracle, resolvent: ResolventOracle,
                                 t_list=(0.1, 1.0), lam_list=(0.5, 1.0, 2.0)) -> CheckReport:
    """f >= 0 implies T(t) f >= 0 and lam R(lam) f >= 0 (zero tolerance on the
    sign), with the sup-norm contractions ||T(t) f|| <= ||f|| and
    ||lam R(lam) f|| <= ||f||."""
    worst, loc = 0.0, None
    slack = 1e-12  # contraction only, sign violations use zero tolerance
    for k, f in enumerate(_test_panel(semigroup.generator.size)):
        norm = np.abs(f).max(initial=0.0)
        for t in t_list:
            out = semigroup.apply(t, f)
            sign = max(0.0, -out.min(initial=0.0))
            if sign > worst:
                worst, loc = sign, ("sign_T", float(t), k)
            contraction = max(0.0, np.abs(out).max(initial=0.0) - norm - slack)
            if contraction > worst:
                worst, loc = contraction, ("norm_T", float(t), k)
        for lam in lam_list:
            out = lam * resolvent.apply(lam, f)
            sign = max(0.0, -out.min(initial=0.0))
            if sign > worst:
                worst, loc = sign, ("sign_R", float(lam), k)
            contraction = max(0.0, np.abs(out).max(initial=0.0) - norm - slack)
            if contraction > worst:
                worst, loc = contraction, ("norm_R", float(lam), k)
    return _report("positivity_contraction", worst, 0.0, loc)


def duality_check(kernel: KernelMatrix, rng: np.random.Generator,
                  trials: int = 5, tol: float = 1e-12) -> CheckReport:
    """Pairing identity <K f, mu> = <f, mu K> on random (f, mu) pairs."""
    worst, loc = 0.0, None
    n = kernel.size
    for k in range(trials):
        f = rng.uniform(-1.0, 1.0, size=n)
        mu = DualVector(rng.uniform(0.0, 1.0, size=n))
        res = abs(mu.pair(apply(kernel, f)) - apply_adjoint(kernel, mu).pair(f))
        if res > worst:
            worst, loc = res, (k,)
    return _report("duality", worst, tol, loc)


def post_widder_rate_check(resolvent: ResolventOracle, semigroup: SemigroupOracle,
                           t: float, n_list=(16, 32, 64, 128),
                           band=(0.25, 0.75), f=None) -> CheckReport:
    """Post-Widder errors err(n) against T(t) f must shrink with doubling
    ratio inside the band (the O(1/n) rate).  Uses a resolvent-smoothed test
    vector by default."""
    size = resolvent.generator.size
    if f is None:
        # smooth vector: twice resolvent-regularized constant
        f = resolvent.apply(1.0, resolvent.apply(2.0, np.ones(size)))
    reference = semigroup.apply(t, f)
    errors = [float(np.abs(post_widder(resolvent, t, n, f) - reference).max(initial=0.0))
              for n in n_list]
    if max(errors) < 1e-9:
        # solver noise dominates below this; the doubling ratio is meaningless
        return _report("post_widder_rate", 0.0, 0.0, None, notes="errors at roundoff; vacuous")
    worst, loc = 0.0, None
    for i, (e_n, e_2n) in enumerate(zip(errors, errors[1:])):
        ratio = e_2n / e_n if e_n > 0 else 0.0
        miss = max(band[0] - ratio, ratio - band[1], 0.0)
        if miss > worst:
            worst, loc = miss, (int(n_list[i]), int(n_list[i + 1]))
    notes = "errors=" + ",".join(f"{e:.3e}" for e in errors)
    return _report("post_widder_rate", worst, 0.0, loc, notes)


def joint_continuity_probe(surface, t_window, xs, name: str = "joint_continuity",
                           lattice: int = 16) -> CheckReport:
    """Oscillation of a (t, x) surface over neighboring lattice cells and its
    decay under lattice refinement.

    ``surface(t, x)`` evaluates pointwise; the probe compares the maximal
    neighbor difference on a coarse and a doubled lattice in both variables.
    """
    t0, t1 = t_window
    xs = np.asarray(xs, dtype=float)

    def oscillation(nt: int, stride: int) -> float:
        ts = np.linspace(t0, t1, nt)
        sub = xs[::stride]
        values = np.array([[surface(float(t), float(x)) for x in sub] for t in ts])
        worst = 0.0
        if values.shape[0] > 1:
            worst = max(worst, float(np.abs(np.diff(values, axis=0)).max(initial=0.0)))
        if values.shape[1] > 1:
            worst = max(worst, float(np.abs(np.diff(values, axis=1)).max(initial=0.0)))
        return worst

    coarse = oscillation(lattice, 2)
    fine = oscillation(2 * lattice, 1)
    if coarse <= 1e-14:
        return CheckReport(name, True, 0.0, None, CONTINUOUS_BAND, PASS, "zero oscillation")
    ratio = fine / coarse
    if ratio <= CONTINUOUS_BAND:
        verdict = PASS
    elif ratio >= DISCONTINUOUS_BAND:
        verdict = FAIL
    else:
        verdict = INCONCLUSIVE
    return CheckReport(name, verdict == PASS, float(ratio), None, CONTINUOUS_BAND,
                       verdict, f"oscillation {coarse:.3e} -> {fine:.3e}")


def c0_uniform_convergence_check(stage_oracles, limit_oracle, f, t_horizon: float,
                                 tol: float = 1e-3, samples: int = 8) -> CheckReport:
    """Per-stage max over a t-lattice of ||T_n(t) f - T(t) f||_inf; passes when
    the stage maxima are nonincreasing and the last falls below tol.

    ``f`` must vanish outside the smallest compact (caller's responsibility)."""
    f = np.asarray(f, dtype=float)
    ts = np.linspace(t_horizon / samples, t_horizon, samples)
    limit_values = [limit_oracle.apply(t, f) for t in ts]
    gaps = []
    for oracle in stage_oracles:
        gap = max(
            float(np.abs(oracle.apply(t, f) - ref).max(initial=0.0))
            for t, ref in zip(ts, limit_values)
        )
        gaps.append(gap)
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    final = gaps[-1] if gaps else 0.0
    notes = "gaps=" + ",".join(f"{g:.3e}" for g in gaps)
    if not nonincreasing:
        return CheckReport("c0_uniform_convergence", False, float(final), None,
                           float(tol), FAIL, notes + "; stage maxima not monotone")
    return _report("c0_uniform_convergence", final, tol, None, notes)


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in sorted(reports, key=lambda r: r.name)],
                      indent=2, sort_keys=True)


def suite_exit_code(reports) -> int:
    """0 iff every non-inconclusive check passes."""
    return 0 if all(r.passed or r.verdict == INCONCLUSIVE for r in reports) else 2


def run_generator_suite(generator: GeneratorMatrix, rng: np.random.Generator,
                        prefix: str = "") -> list:
    """The core invariant suite on one generator: resolvent identity,
    positivity/contraction, semigroup law, duality, Post-Widder rate."""
    resolvent = ResolventOracle(generator)
    semigroup = SemigroupOracle(generator)
    reports = [
        semigroup_law_check(semigroup, (0.1, 0.5, 1.0)),
        resolvent_identity_check(resolvent, (0.5, 1.0, 2.0)),
        positivity_contraction_check(semigroup, resolvent),
        duality_check(semigroup.matrix(0.5), rng),
        post_widder_rate_check(resolvent, semigroup, t=1.0),
    ]
    if prefix:
        reports = [
            CheckReport(f"{prefix}:{r.name}", r.passed, r.worst_residual,
                        r.location, r.tolerance, r.verdict, r.notes)
            for r in reports
        ]
    return reports


def _rename(report: CheckReport, name: str) -> CheckReport:
    return CheckReport(name, report.passed, report.worst_residual, report.location,
                       report.tolerance, report.verdict, report.notes)


def compact_bump(xs: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Smooth bump supported in |x| < radius, sampled at 1D coordinates."""
    scaled = xs / radius
    inside = np.abs(scaled) < 1.0
    values = np.zeros_like(xs)
    values[inside] = np.exp(1.0 - 1.0 / (1.0 - scaled[inside] ** 2))
    return values


def run_suite(seed: int = 7, sizes=(4, 8, 16, 32), per_size: int = 5) -> list:
    """The full deterministic suite: built-in elliptic fixtures plus seeded
    random sub-Markov generators."""
    from .elliptic import (assemble, generator_convergence_check, laplace_field,
                           ou_field)
    from .engine import random_submarkov_generator
    from .grids import symmetric_interval_grid

    rng = np.random.default_rng(seed)
    reports = []

    grid = symmetric_interval_grid(8.0, 0.1)
    schedule = ExhaustionSchedule((2.0, 4.0, 6.0, 8.0), grid, compact_margin=1.0)
    bump = compact_bump(grid.points[:, 0])
    for field_factory in (laplace_field, ou_field):
        field = field_factory()
        gen = assemble(field, schedule.radii[-1], grid)
        reports.extend(run_generator_suite(gen, rng, prefix=field.name))
        stage_oracles = [SemigroupOracle(assemble(field, r, grid)) for r in schedule.radii]
        reports.append(_rename(
            c0_uniform_convergence_check(stage_oracles[:-1], stage_oracles[-1],
                                         bump, t_horizon=0.5),
            f"{field.name}:c0_uniform_convergence",
        ))
        if field.name == "ou":
            # conservative field: R_n(1) 1 increases to 1 on the compact
            gc = generator_convergence_check(field, schedule, np.ones(grid.size), tol=1e-3)
            reports.append(_report(
                f"{field.name}:generator_convergence",
                gc.stage_u_diffs[-2], 1e-3, None,
                "stage_diffs=" + ",".join(f"{d:.3e}" for d in gc.stage_u_diffs)))
        else:
            # slowly conservative field: require geometric stage-diff decay
            gc = generator_convergence_check(field, schedule, bump, tol=1e-3)
            diffs = gc.stage_u_diffs[:-1]  # last entry is 0 by construction
            ratios = [b / a for a, b in zip(diffs, diffs[1:]) if a > 1e-14]
            worst = max(ratios, default=0.0)
            reports.append(_report(
                f"{field.name}:generator_convergence", worst, 0.5, None,
                "stage_diffs=" + ",".join(f"{d:.3e}" for d in diffs)))

    for size in sizes:
        for k in range(per_size):
            gen = random_submarkov_generator(size, rng)
            reports.extend(run_generator_suite(gen, rng, prefix=f"random_n{size}_{k}"))
    return sorted(reports, key=lambda r: r.name)
