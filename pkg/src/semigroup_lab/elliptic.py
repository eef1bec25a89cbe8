"""Exhaustion pipeline for elliptic operators with unbounded coefficients.

Assembles Dirichlet finite-difference discretizations of
A u = sum a_ij d2u/dx_i dx_j + sum b_j du/dx_j on growing balls over one
master grid, computes monotone resolvent/semigroup limits, and runs the
continuity, smoothing, stochastic-continuity and mass-loss probes.

The drift is discretized with first-order upwind differences: central
differencing can produce negative off-diagonals and destroy the maximum
principle that the whole monotone construction rests on.  In 2D the diffusion
matrix must be diagonal (mixed-derivative stencils are not monotone).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .engine import GeneratorMatrix, ResolventOracle, SemigroupOracle
from .errors import EllipticityError, SchemeError
from .grids import StateGrid, symmetric_interval_grid

#: entrywise slack for the discrete maximum principle across exhaustion stages
EXHAUSTION_MONOTONE_TOL = 1e-10

#: oscillation-ratio bands for the refinement-decay verdicts
CONTINUOUS_BAND = 0.7
DISCONTINUOUS_BAND = 0.9

# directions used to spot-check the ellipticity bound at grid points
_TEST_DIRECTIONS = {
    1: [np.array([1.0])],
    2: [np.array([1.0, 0.0]), np.array([0.0, 1.0]),
        np.array([1.0, 1.0]) / np.sqrt(2), np.array([1.0, -1.0]) / np.sqrt(2)],
}


@dataclass(frozen=True)
class CoefficientField:
    """Elliptic data: diffusion matrix a(x), drift vector b(x), and an
    ellipticity witness eta(x) > 0.  Callables take a point of shape (d,)."""

    name: str
    dimension: int
    a: Callable[[np.ndarray], np.ndarray]
    b: Callable[[np.ndarray], np.ndarray]
    eta: Callable[[np.ndarray], float]

    def diffusion(self, x) -> np.ndarray:
        out = np.atleast_2d(np.asarray(self.a(np.asarray(x, dtype=float)), dtype=float))
        if out.shape != (self.dimension, self.dimension):
            raise ValueError(f"diffusion must have shape ({self.dimension}, {self.dimension})")
        return out

    def drift(self, x) -> np.ndarray:
        out = np.atleast_1d(np.asarray(self.b(np.asarray(x, dtype=float)), dtype=float))
        if out.shape != (self.dimension,):
            raise ValueError(f"drift must have shape ({self.dimension},)")
        return out


def laplace_field(dimension: int = 1, diffusivity: float = 1.0) -> CoefficientField:
    d = dimension
    return CoefficientField(
        "laplace", d,
        a=lambda x: diffusivity * np.eye(d),
        b=lambda x: np.zeros(d),
        eta=lambda x: diffusivity,
    )


def ou_field(dimension: int = 1, diffusivity: float = 0.5) -> CoefficientField:
    d = dimension
    return CoefficientField(
        "ou", d,
        a=lambda x: diffusivity * np.eye(d),
        b=lambda x: -np.asarray(x, dtype=float),
        eta=lambda x: diffusivity,
    )


def cubic_drift_field(dimension: int = 1, diffusivity: float = 1.0) -> CoefficientField:
    d = dimension
    return CoefficientField(
        "cubic_drift", d,
        a=lambda x: diffusivity * np.eye(d),
        b=lambda x: np.asarray(x, dtype=float) ** 3,
        eta=lambda x: diffusivity,
    )


def polynomial_field(a_coeffs, b_coeffs, name: str = "polynomial") -> CoefficientField:
    """1D field with polynomial coefficients (ascending-power lists)."""
    a_poly = np.polynomial.Polynomial(a_coeffs)
    b_poly = np.polynomial.Polynomial(b_coeffs)
    return CoefficientField(
        name, 1,
        a=lambda x: np.array([[a_poly(float(x[0]))]]),
        b=lambda x: np.array([b_poly(float(x[0]))]),
        eta=lambda x: a_poly(float(x[0])),
    )


BUILTIN_FIELDS = {
    "laplace": laplace_field,
    "ou": ou_field,
    "cubic_drift": cubic_drift_field,
}


def validate_coefficients(coeffs: CoefficientField, grid: StateGrid, radius: float) -> None:
    """Check symmetry, the ellipticity bound on test directions, and drift
    boundedness at every grid point of the ball."""
    for i in np.flatnonzero(grid.ball_mask(radius)):
        x = grid.points[i]
        a = coeffs.diffusion(x)
        if not np.allclose(a, a.T, atol=1e-12):
            raise EllipticityError(f"diffusion matrix not symmetric at x={x}", point=x)
        eta = coeffs.eta(x)
        if eta <= 0:
            raise EllipticityError(f"ellipticity witness {eta} <= 0 at x={x}", point=x)
        for xi in _TEST_DIRECTIONS[grid.dimension]:
            quad = float(xi @ a @ xi)
            if quad < eta * float(xi @ xi) - 1e-12:
                raise EllipticityError(
                    f"ellipticity violated at x={x}: xi^T a xi = {quad:.3e} < eta = {eta:.3e}",
                    point=x,
                )
        if not np.all(np.isfinite(coeffs.drift(x))):
            raise EllipticityError(f"drift unbounded at x={x}", point=x)


def assemble(coeffs: CoefficientField, radius: float, grid: StateGrid) -> GeneratorMatrix:
    """Dirichlet discretization of the operator on the ball B(0, radius).

    Central differences for the diffusion part, upwind differences for the
    drift; points outside the ball get zero rows (killed states).  The
    resulting matrix is an exact negated M-matrix by construction.
    """
    if coeffs.dimension != grid.dimension:
        raise ValueError("coefficient field and grid dimensions differ")
    validate_coefficients(coeffs, grid, radius)
    h = grid.spacing
    inside = grid.ball_mask(radius) & grid.interior_mask
    lattice = grid.lattice_index_map()
    keys = np.round(grid.points / h).astype(int)
    n = grid.size
    mat = sp.lil_matrix((n, n))
    for i in np.flatnonzero(inside):
        x = grid.points[i]
        a = coeffs.diffusion(x)
        if grid.dimension == 2 and abs(a[0, 1]) > 0:
            raise EllipticityError(
                f"2D assembly requires diagonal diffusion; a_12 = {a[0, 1]} at x={x}",
                point=x,
            )
        b = coeffs.drift(x)
        diag = 0.0
        for j in range(grid.dimension):
            ajj = a[j, j]
            step = np.zeros(grid.dimension, dtype=int)
            step[j] = 1
            minus = lattice.get(tuple(keys[i] - step))
            plus = lattice.get(tuple(keys[i] + step))
            left = ajj / h**2 + max(-b[j], 0.0) / h
            right = ajj / h**2 + max(b[j], 0.0) / h
            if left < 0 or right < 0:
                raise SchemeError(f"negative stencil weight at x={x}")
            diag -= left + right
            if minus is not None and inside[minus]:
                mat[i, minus] = left
            if plus is not None and inside[plus]:
                mat[i, plus] = right
        mat[i, i] = diag
    return GeneratorMatrix(mat.tocsr(), grid=grid, active_mask=inside)


@dataclass(frozen=True)
class ExhaustionSchedule:
    """Increasing radii driving the exhaustion, over one master grid.

    ``compact_margin`` shrinks the default compact set inside the smallest
    ball so that convergence is measured away from moving boundary layers.
    """

    radii: tuple
    grid: StateGrid
    compact_margin: float | None = None

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly increasing")
        span = np.abs(self.grid.points).max(axis=0)
        if np.any(span < radii[-1] - 1e-12):
            raise ValueError("master grid does not cover the largest ball")
        margin = self.compact_margin
        if margin is None:
            margin = 2 * self.grid.spacing
        if radii[0] - margin <= 0:
            raise ValueError("compact margin leaves the smallest compact empty")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "compact_margin", float(margin))

    def compact_mask(self, radius: float | None = None) -> np.ndarray:
        """Compact K_n: the closed ball of radius r_n - margin (default r_1)."""
        r = self.radii[0] if radius is None else radius
        return self.grid.closed_ball_mask(r - self.compact_margin)


@dataclass(frozen=True)
class ExhaustionStage:
    radius: float
    values: np.ndarray


@dataclass(frozen=True)
class ExhaustionReport:
    stages: list
    violations: list  # (stage index, entry index, magnitude)
    sup_diffs: list  # sup over the smallest compact of |u_{n+1} - u_n|
    converged: bool
    monotone: bool
    limit: np.ndarray

    def summary(self) -> dict:
        return {
            "monotone": bool(self.monotone),
            "converged": bool(self.converged),
            "final_sup_diff": float(self.sup_diffs[-1]) if self.sup_diffs else 0.0,
        }


def _run_stages(stage_values, schedule: ExhaustionSchedule, tol: float) -> ExhaustionReport:
    compact = schedule.compact_mask()
    stages, violations, sup_diffs = [], [], []
    prev = None
    for radius, values in stage_values:
        stages.append(ExhaustionStage(radius, values))
        if prev is not None:
            drop = prev - values
            worst = float(drop.max(initial=0.0))
            if worst > EXHAUSTION_MONOTONE_TOL:
                violations.append((len(stages) - 1, int(drop.argmax()), worst))
            sup_diffs.append(float(np.abs(values - prev)[compact].max(initial=0.0)))
        prev = values
    converged = bool(sup_diffs) and sup_diffs[-1] <= tol
    return ExhaustionReport(stages, violations, sup_diffs, converged,
                            not violations, prev)


def exhaustion_resolvent(coeffs: CoefficientField, lam: float, f,
                         schedule: ExhaustionSchedule, tol: float = 1e-6) -> ExhaustionReport:
    """Stage resolvents u_n = R_n(lam) f, monotone by the maximum principle."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    f = np.asarray(f, dtype=float)
    if f.min(initial=0.0) < 0:
        raise ValueError("exhaustion inputs must be nonnegative")
    values = []
    for radius in schedule.radii:
        oracle = ResolventOracle(assemble(coeffs, radius, schedule.grid))
        values.append((radius, oracle.apply(lam, f)))
    return _run_stages(values, schedule, tol)


def exhaustion_semigroup(coeffs: CoefficientField, t: float, f,
                         schedule: ExhaustionSchedule, tol: float = 1e-6) -> ExhaustionReport:
    """Stage semigroups T_n(t) f from uniformization, monotone in n."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    f = np.asarray(f, dtype=float)
    if f.min(initial=0.0) < 0:
        raise ValueError("exhaustion inputs must be nonnegative")
    values = []
    for radius in schedule.radii:
        oracle = SemigroupOracle(assemble(coeffs, radius, schedule.grid))
        values.append((radius, oracle.apply(t, f)))
    return _run_stages(values, schedule, tol)


def limit_resolvent(coeffs: CoefficientField, schedule: ExhaustionSchedule) -> ResolventOracle:
    """Resolvent oracle of the largest exhaustion stage (the numerical limit)."""
    return ResolventOracle(assemble(coeffs, schedule.radii[-1], schedule.grid))


def limit_semigroup(coeffs: CoefficientField, schedule: ExhaustionSchedule) -> SemigroupOracle:
    return SemigroupOracle(assemble(coeffs, schedule.radii[-1], schedule.grid))


def refine(schedule: ExhaustionSchedule) -> ExhaustionSchedule:
    """The same schedule on a grid with half the spacing."""
    grid = schedule.grid
    if grid.dimension != 1:
        raise NotImplementedError("refinement probes are 1D")
    radius = float(np.abs(grid.points).max())
    fine = symmetric_interval_grid(radius, grid.spacing / 2)
    return ExhaustionSchedule(schedule.radii, fine, schedule.compact_margin)


def adjacent_jump(values: np.ndarray, grid: StateGrid, mask: np.ndarray) -> float:
    """Maximal |u(x') - u(x)| over lattice-neighbor pairs inside the mask."""
    lattice = grid.lattice_index_map()
    keys = np.round(grid.points / grid.spacing).astype(int)
    worst = 0.0
    for i in np.flatnonzero(mask):
        for j in range(grid.dimension):
            step = np.zeros(grid.dimension, dtype=int)
            step[j] = 1
            nb = lattice.get(tuple(keys[i] + step))
            if nb is not None and mask[nb]:
                worst = max(worst, abs(float(values[nb] - values[i])))
    return worst


def refinement_verdict(jump_coarse: float, jump_fine: float) -> str:
    """Continuity verdict from the jump decay under one grid refinement."""
    if jump_coarse <= 1e-14:
        return "continuous"
    ratio = jump_fine / jump_coarse
    if ratio <= CONTINUOUS_BAND:
        return "continuous"
    if ratio >= DISCONTINUOUS_BAND:
        return "discontinuous"
    return "inconclusive"


@dataclass(frozen=True)
class OscillationReport:
    jump_coarse: float
    jump_fine: float
    verdict: str
    values_coarse: np.ndarray = None
    values_fine: np.ndarray = None

    @property
    def ratio(self) -> float:
        if self.jump_coarse == 0.0:
            return 0.0
        return self.jump_fine / self.jump_coarse


def hypothesis_B_probe(coeffs: CoefficientField, lam: float,
                       schedule: ExhaustionSchedule) -> OscillationReport:
    """Continuity probe for R(lam) 1: adjacent-cell jump of the limit
    resolvent of the constant function, and its decay under h -> h/2."""
    coarse = schedule
    fine = refine(schedule)
    results = []
    for sched in (coarse, fine):
        oracle = limit_resolvent(coeffs, sched)
        u = oracle.apply(lam, np.ones(sched.grid.size))
        results.append((u, adjacent_jump(u, sched.grid, sched.compact_mask())))
    (u_c, j_c), (u_f, j_f) = results
    return OscillationReport(j_c, j_f, refinement_verdict(j_c, j_f), u_c, u_f)


# discontinuous test inputs, defined as functions of the points so they can be
# sampled consistently on the coarse and the refined grid
INDICATOR_PANEL = {
    "halfspace": lambda pts: (pts[:, 0] >= 0).astype(float),
    "box": lambda pts: np.all(np.abs(pts) <= 1.0, axis=1).astype(float),
}


def strong_feller_probe(coeffs: CoefficientField, t: float,
                        schedule: ExhaustionSchedule, inputs: dict | None = None) -> dict:
    """Smoothing probe: limit semigroup applied to discontinuous indicators,
    with adjacent-cell oscillation decay under refinement.  ``inputs`` maps
    names to callables sampling a points array; returns a report per name."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    if inputs is None:
        inputs = INDICATOR_PANEL
    coarse = schedule
    fine = refine(schedule)
    per_grid = []
    for sched in (coarse, fine):
        oracle = limit_semigroup(coeffs, sched)
        per_grid.append({
            name: oracle.apply(t, sample(sched.grid.points)) for name, sample in inputs.items()
        })
    reports = {}
    for name in sorted(inputs):
        u_c, u_f = per_grid[0][name], per_grid[1][name]
        j_c = adjacent_jump(u_c, coarse.grid, coarse.compact_mask())
        j_f = adjacent_jump(u_f, fine.grid, fine.compact_mask())
        reports[name] = OscillationReport(j_c, j_f, refinement_verdict(j_c, j_f), u_c, u_f)
    return reports


@dataclass(frozen=True)
class StochasticContinuityReport:
    times: list
    sups: list  # sup over the compact of |T(t) 1 - 1|
    passed: bool


def stochastic_continuity_values(times, sups, threshold: float = 0.01) -> StochasticContinuityReport:
    """Pass when the sups decrease monotonically along decreasing t (within
    floating-point slack) and fall below the threshold at the smallest t."""
    times = [float(t) for t in times]
    sups = [float(s) for s in sups]
    monotone = all(b <= a + 1e-12 for a, b in zip(sups, sups[1:]))
    passed = monotone and bool(sups) and sups[-1] <= threshold
    return StochasticContinuityReport(times, sups, passed)


def stochastic_continuity_probe(coeffs: CoefficientField, schedule: ExhaustionSchedule,
                                t_list, threshold: float = 0.01) -> StochasticContinuityReport:
    """sup_K |T(t) 1 - 1| for the limit semigroup along t decreasing to 0.

    t = 0 entries use the convention T(0) = I and contribute exactly 0.
    """
    t_list = [float(t) for t in t_list]
    if any(b >= a for a, b in zip(t_list, t_list[1:])):
        raise ValueError("t_list must be strictly decreasing")
    oracle = limit_semigroup(coeffs, schedule)
    compact = schedule.compact_mask()
    ones = np.ones(schedule.grid.size)
    sups = []
    for t in t_list:
        if t == 0:
            sups.append(0.0)
        else:
            sups.append(float(np.abs(oracle.apply(t, ones) - 1.0)[compact].max()))
    return stochastic_continuity_values(t_list, sups, threshold)


@dataclass(frozen=True)
class GeneratorConvergenceReport:
    stage_u_diffs: list  # sup_K |u_n - u_limit|
    stage_f_diffs: list  # sup_K |f_n - (u_limit - g)|
    converged: bool


def generator_convergence_check(coeffs: CoefficientField, schedule: ExhaustionSchedule,
                                g, tol: float = 1e-3) -> GeneratorConvergenceReport:
    """Constructive generator convergence: with u_n = R_n(1) g and
    f_n = u_n - g, both sequences converge on compacts to the limit pair."""
    g = np.asarray(g, dtype=float)
    compact = schedule.compact_mask()
    stage_values = []
    for radius in schedule.radii:
        oracle = ResolventOracle(assemble(coeffs, radius, schedule.grid))
        stage_values.append(oracle.apply(1.0, g))
    u_limit = stage_values[-1]
    u_diffs = [float(np.abs(u - u_limit)[compact].max(initial=0.0)) for u in stage_values]
    # f_n - f = u_n - u, so the drift of the image pairs matches exactly
    f_diffs = list(u_diffs)
    converged = u_diffs[-2] <= tol if len(u_diffs) > 1 else True
    return GeneratorConvergenceReport(u_diffs, f_diffs, converged)


@dataclass(frozen=True)
class MassLossReport:
    t: float
    mass_loss: float  # sup over the compact of 1 - T(t) 1
    values: np.ndarray  # T(t) 1 on the master grid

    def loss_at(self, grid: StateGrid, x) -> float:
        return float(1.0 - self.values[grid.index_near(x)])


def conservativeness(coeffs: CoefficientField, t: float,
                     schedule: ExhaustionSchedule) -> MassLossReport:
    """Mass retained by the limit semigroup: reports sup_K (1 - T(t) 1)."""
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    oracle = limit_semigroup(coeffs, schedule)
    values = oracle.apply(t, np.ones(schedule.grid.size))
    compact = schedule.compact_mask()
    return MassLossReport(t, float((1.0 - values)[compact].max(initial=0.0)), values)
