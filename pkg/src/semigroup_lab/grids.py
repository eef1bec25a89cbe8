"""Finite grids standing in for the continuum state space.

A grid is a uniform lattice of points in R^d (d = 1 or 2) together with an
interior mask (where generator stencils are applied) and named compact masks
(the sets on which uniform convergence is measured).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np


def _frozen(arr) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class StateGrid:
    dimension: int
    points: np.ndarray  # (N, dimension)
    spacing: float
    interior_mask: np.ndarray  # (N,) bool
    compact_masks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise ValueError(f"points must have shape (N, {self.dimension})")
        n = pts.shape[0]
        if len({tuple(p) for p in np.round(pts / self.spacing).astype(int)}) != n:
            raise ValueError("grid points must be pairwise distinct")
        interior = np.asarray(self.interior_mask, dtype=bool)
        if interior.shape != (n,):
            raise ValueError("interior_mask must be a boolean vector of length N")
        for name, mask in self.compact_masks.items():
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (n,):
                raise ValueError(f"compact mask {name!r} must have length N")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "interior_mask", _frozen(interior))
        object.__setattr__(
            self,
            "compact_masks",
            {k: _frozen(np.asarray(v, dtype=bool)) for k, v in self.compact_masks.items()},
        )

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def radii(self) -> np.ndarray:
        """Euclidean norm of every grid point."""
        return np.linalg.norm(self.points, axis=1)

    def ball_mask(self, radius: float) -> np.ndarray:
        """Boolean mask of points with |x| < radius."""
        return self.radii() < radius - 1e-12 * max(1.0, radius)

    def closed_ball_mask(self, radius: float) -> np.ndarray:
        return self.radii() <= radius + 1e-12 * max(1.0, radius)

    def with_compact(self, name: str, mask: np.ndarray) -> "StateGrid":
        masks = dict(self.compact_masks)
        masks[name] = np.asarray(mask, dtype=bool)
        return dataclasses.replace(self, compact_masks=masks)

    def lattice_index_map(self) -> dict:
        """Map from integer lattice coordinates to the point index."""
        keys = np.round(self.points / self.spacing).astype(int)
        return {tuple(k): i for i, k in enumerate(keys)}

    def index_near(self, x) -> int:
        """Index of the grid point closest to x (must match a lattice site)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        key = tuple(np.round(x / self.spacing).astype(int))
        idx = self.lattice_index_map().get(key)
        if idx is None:
            raise KeyError(f"no grid point near {x}")
        return idx


def interval_grid(lo: float, hi: float, h: float, compacts: dict | None = None) -> StateGrid:
    """Uniform 1D grid on [lo, hi]; endpoints are non-interior."""
    n = int(round((hi - lo) / h))
    xs = lo + h * np.arange(n + 1)
    interior = np.ones(n + 1, dtype=bool)
    interior[0] = interior[-1] = False
    grid = StateGrid(1, xs[:, None], h, interior)
    for name, mask in (compacts or {}).items():
        grid = grid.with_compact(name, mask)
    return grid


def rectangle_grid(lo, hi, h: float) -> StateGrid:
    """Uniform 2D grid on [lo0, hi0] x [lo1, hi1]; edge points are non-interior."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    ns = np.round((hi - lo) / h).astype(int)
    xs = lo[0] + h * np.arange(ns[0] + 1)
    ys = lo[1] + h * np.arange(ns[1] + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    on_edge = (
        np.isclose(pts[:, 0], lo[0]) | np.isclose(pts[:, 0], hi[0])
        | np.isclose(pts[:, 1], lo[1]) | np.isclose(pts[:, 1], hi[1])
    )
    return StateGrid(2, pts, h, ~on_edge)


def symmetric_interval_grid(radius: float, h: float) -> StateGrid:
    """1D grid on [-radius, radius], the usual master grid for exhaustions."""
    return interval_grid(-radius, radius, h)
