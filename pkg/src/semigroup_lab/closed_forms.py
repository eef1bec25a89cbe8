"""Closed-form reference semigroups and resolvents.

These families serve as exact oracles and as demonstrations that the
hypotheses of the monotone-limit theory are sharp:

* ``shift_weighted`` -- weighted right shifts on (0, 1] whose monotone limit
  is the pure shift, which maps continuous functions to discontinuous ones
  while its resolvent smooths everything.
* ``shift_halfline`` -- the pure shift on (0, infinity) with the same
  resolvent/semigroup mismatch.
* ``radial_d3`` -- the radial reduction (d = 3) of the Dirichlet Laplacian
  outside a shrinking ball; the limit of R(lam) 1 jumps at the origin.
* ``scalar_decreasing`` -- the scalar family e^{-n t}, a decreasing limit
  that loses continuity at t = 0.

Functions here take callables over the continuum, so the oracles are
grid-free; ``discretize_example`` samples them onto a grid for
cross-validation against the matrix machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .grids import StateGrid
from .kernels import KernelMatrix

INF = math.inf


def _vector_eval(func, xs: np.ndarray) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size < 2:
        # scalar-only callables silently squeeze 1-element arrays; skip them
        return np.array([float(np.squeeze(func(float(s)))) for s in xs])
    try:
        out = np.asarray(func(xs), dtype=float)
    except (TypeError, ValueError):
        return np.array([float(func(float(s))) for s in xs])
    if out.ndim == 0:
        return np.full(xs.shape, float(out))
    if out.shape == xs.shape:
        return out
    return np.array([float(np.squeeze(func(float(s)))) for s in xs])


def adaptive_trapezoid(func, a: float, b: float, rtol: float = 1e-10,
                       max_doublings: int = 22) -> float:
    """Composite trapezoid with interval doubling until the relative change
    drops below rtol.  The integrand may be scalar or vectorized."""
    if b <= a:
        return 0.0
    h = b - a
    total = 0.5 * h * float(sum(_vector_eval(func, np.array([a, b]))))
    n = 1
    for _ in range(max_doublings):
        midpoints = a + h * (np.arange(n) + 0.5)
        mid_sum = float(_vector_eval(func, midpoints).sum())
        new_total = 0.5 * total + 0.5 * h * mid_sum
        if abs(new_total - total) <= rtol * max(abs(new_total), 1e-300) + 1e-300:
            return new_total
        total = new_total
        h *= 0.5
        n *= 2
    return total


def _check_unit_interval(x: float) -> None:
    if not 0 < x <= 1:
        raise ValueError(f"x must lie in (0, 1], got {x}")


def _weight(n, x: float, s: float) -> float:
    """The shift weight (s / x)^{1/n}; 1 for the unweighted limit n = inf."""
    if n == INF or n is None:
        return 1.0
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"n must be a positive integer or inf, got {n}")
    if s <= 0:
        return 0.0
    return (s / x) ** (1.0 / n)


def weighted_shift_apply(n, t: float, f, x: float) -> float:
    """T_n(t) f(x) = ((x - t)/x)^{1/n} f(x - t) for x > t, else 0, on (0, 1]."""
    _check_unit_interval(x)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0:
        return float(f(x))
    if x <= t:
        return 0.0
    return _weight(n, x, x - t) * float(f(x - t))


def weighted_shift_resolvent(n, lam: float, f, x: float, rtol: float = 1e-10) -> float:
    """R_n(lam) f(x) = int_0^x e^{-lam (x - s)} (s/x)^{1/n} f(s) ds on (0, 1]."""
    _check_unit_interval(x)
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    _weight(n, x, x)  # validate n
    power = 0.0 if n == INF or n is None else 1.0 / n

    def integrand(s):
        s = np.asarray(s, dtype=float)
        if power == 0.0:
            weight = 1.0
        else:
            weight = np.where(s > 0, (np.maximum(s, 1e-300) / x) ** power, 0.0)
        return np.exp(lam * (s - x)) * weight * _vector_eval(f, s)

    return adaptive_trapezoid(integrand, 0.0, x, rtol=rtol)


def halfline_shift(f, x: float, t: float | None = None, lam: float | None = None) -> float:
    """The pure shift on (0, infinity): semigroup branch with ``t``, resolvent
    branch with ``lam`` (exactly one of the two must be given)."""
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if (t is None) == (lam is None):
        raise ValueError("provide exactly one of t and lam")
    if t is not None:
        if t < 0:
            raise ValueError(f"time must be nonnegative, got {t}")
        if t == 0:
            return float(f(x))
        return float(f(x - t)) if x > t else 0.0
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return adaptive_trapezoid(
        lambda s: np.exp(lam * (np.asarray(s, dtype=float) - x)) * _vector_eval(f, np.asarray(s, dtype=float)),
        0.0, x,
    )


def radial_dirichlet_resolvent(a: float, lam: float, r: float) -> float:
    """R(lam) 1 for the Dirichlet Laplacian outside the ball of radius a in
    d = 3, reduced to the radial ODE lam u - u'' - (2/r) u' = 1 on (a, inf).

    Returns 0 for r <= a; tends to 1/lam pointwise for r > 0 as a -> 0,
    exhibiting the jump of the limit profile at the origin.
    """
    if a <= 0:
        raise ValueError(f"inner radius must be positive, got {a}")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if r < 0:
        raise ValueError(f"radius must be nonnegative, got {r}")
    if r <= a:
        return 0.0
    return (1.0 - (a / r) * math.exp(-math.sqrt(lam) * (r - a))) / lam


def scalar_decreasing(n: int, t: float) -> float:
    """The scalar family e^{-n t}, with the convention T_n(0) = 1."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0:
        return 1.0
    return math.exp(-n * t)


def scalar_decreasing_limit(t: float) -> float:
    """Pointwise limit over n: 1 at t = 0 and 0 for every t > 0."""
    return 1.0 if t == 0 else 0.0


@dataclass(frozen=True)
class DiscretizedFamily:
    kernel: KernelMatrix | None
    profile: np.ndarray | None


def discretize_shift_kernel(grid: StateGrid, n=INF) -> KernelMatrix:
    """Sample the weighted shift at t = h (one-cell shift) as a KernelMatrix."""
    if grid.dimension != 1:
        raise DimensionMismatchError("shift families live on 1D grids")
    xs = grid.points[:, 0]
    if np.any(xs <= 0) or np.any(xs > 1 + 1e-12):
        raise ValueError("grid must lie inside (0, 1]")
    h = grid.spacing
    size = grid.size
    entries = np.zeros((size, size))
    order = np.argsort(xs)
    for pos, i in enumerate(order[1:], start=1):
        x = xs[i]
        if x > h:
            entries[i, order[pos - 1]] = _weight(n, x, x - h)
    return KernelMatrix(entries, bound=1.0)


def sample_profile(family: str, grid: StateGrid, *, n=INF, lam: float = 1.0,
                   t: float | None = None, a: float = 1.0) -> np.ndarray:
    """Closed-form profile (resolvent of 1, or semigroup of 1 when t is
    given) sampled at the grid points."""
    xs = grid.points[:, 0] if grid.dimension == 1 else np.linalg.norm(grid.points, axis=1)
    one = lambda s: 1.0
    if family == "shift_weighted":
        if t is None:
            return np.array([weighted_shift_resolvent(n, lam, one, float(x)) for x in xs])
        return np.array([weighted_shift_apply(n, t, one, float(x)) for x in xs])
    if family == "shift_halfline":
        key = {"t": t} if t is not None else {"lam": lam}
        return np.array([halfline_shift(one, float(x), **key) for x in xs])
    if family == "radial_d3":
        return np.array([radial_dirichlet_resolvent(a, lam, float(r)) for r in xs])
    if family == "scalar_decreasing":
        if t is None:
            raise ValueError("scalar_decreasing profiles need a time t")
        return np.full(len(xs), scalar_decreasing(int(n) if n != INF else 1, t))
    raise KeyError(f"unknown family {family!r}")


def discretize_example(family: str, grid: StateGrid, **params) -> DiscretizedFamily:
    """KernelMatrix / function-vector pack for cross-validation on a grid."""
    kernel = None
    if family == "shift_weighted":
        kernel = discretize_shift_kernel(grid, params.get("n", INF))
    return DiscretizedFamily(kernel=kernel, profile=sample_profile(family, grid, **params))


FAMILIES = ("shift_weighted", "shift_halfline", "radial_d3", "scalar_decreasing")
