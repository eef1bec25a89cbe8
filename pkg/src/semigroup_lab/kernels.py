"""Discrete kernels and kernel operators.

A kernel on an N-point grid is a nonnegative N x N matrix whose row i is the
measure k(x_i, .); the operator norm is the maximal row sum.  Matrices are
stored dense up to ``DENSE_LIMIT`` points and as sparse CSR above that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, MonotonicityError, NonFiniteInputError

DENSE_LIMIT = 2048

#: absolute slack absorbing floating-point noise in exact-arithmetic-monotone data
MONOTONE_TOL = 1e-12


def _as_matrix(entries):
    if sp.issparse(entries):
        if entries.shape[0] <= DENSE_LIMIT:
            return np.asarray(entries.todense(), dtype=float)
        return entries.tocsr().astype(float)
    entries = np.array(entries, dtype=float)
    if entries.shape[0] > DENSE_LIMIT:
        return sp.csr_matrix(entries)
    return entries


def _row_sums(entries) -> np.ndarray:
    if sp.issparse(entries):
        return np.asarray(entries.sum(axis=1)).ravel()
    return entries.sum(axis=1)


def _min_entry(entries) -> float:
    if sp.issparse(entries):
        data = entries.data
        if data.size == 0:
            return 0.0
        return min(0.0, data.min()) if entries.nnz < np.prod(entries.shape) else data.min()
    return float(entries.min()) if entries.size else 0.0


@dataclass(frozen=True)
class KernelMatrix:
    entries: np.ndarray
    bound: float = 1.0

    def __post_init__(self):
        entries = _as_matrix(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError("kernel entries must be square")
        if not np.all(np.isfinite(entries.data if sp.issparse(entries) else entries)):
            raise NonFiniteInputError("kernel entries must be finite")
        if _min_entry(entries) < 0:
            raise ValueError("kernel entries must be nonnegative")
        if self.bound < 0:
            raise ValueError("kernel bound must be nonnegative")
        if _row_sums(entries).max(initial=0.0) > self.bound + MONOTONE_TOL:
            raise ValueError("row sums exceed the declared bound")
        if isinstance(entries, np.ndarray):
            entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def operator_norm(self) -> float:
        """Equals the maximal row sum."""
        return float(_row_sums(self.entries).max(initial=0.0))

    def dense(self) -> np.ndarray:
        if sp.issparse(self.entries):
            return np.asarray(self.entries.todense())
        return self.entries

    @property
    def is_sub_markovian(self) -> bool:
        return self.operator_norm <= 1.0 + MONOTONE_TOL


@dataclass(frozen=True)
class DualVector:
    """A discrete positive measure: nonnegative weights on the grid points."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise DimensionMismatchError("weights must be a vector")
        if not np.all(np.isfinite(w)):
            raise NonFiniteInputError("weights must be finite")
        if w.min(initial=0.0) < 0:
            raise ValueError("measure weights must be nonnegative")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def pair(self, f) -> float:
        """The duality pairing <f, mu>."""
        return float(np.dot(np.asarray(f, dtype=float), self.weights))


def apply(kernel: KernelMatrix, f) -> np.ndarray:
    """Apply the kernel operator: (Kf)(x_i) = sum_j K[i, j] f(x_j)."""
    f = np.asarray(f, dtype=float)
    if f.shape != (kernel.size,):
        raise DimensionMismatchError(
            f"function vector has length {f.shape}, kernel expects {kernel.size}"
        )
    if not np.all(np.isfinite(f)):
        raise NonFiniteInputError("function vector must be finite")
    return kernel.entries @ f


def apply_adjoint(kernel: KernelMatrix, mu: DualVector) -> DualVector:
    """Push a measure through the kernel: (mu K)_j = sum_i mu_i K[i, j]."""
    if mu.weights.shape != (kernel.size,):
        raise DimensionMismatchError(
            f"measure has length {mu.weights.shape}, kernel expects {kernel.size}"
        )
    return DualVector(mu.weights @ kernel.entries)


def compose(k1: KernelMatrix, k2: KernelMatrix) -> KernelMatrix:
    """Matrix product; the bound multiplies, positivity is preserved."""
    if k1.size != k2.size:
        raise DimensionMismatchError(f"sizes {k1.size} and {k2.size} do not compose")
    return KernelMatrix(k1.entries @ k2.entries, bound=k1.bound * k2.bound)


def sup_monotone(kernels) -> KernelMatrix:
    """Entrywise supremum of an entrywise-nondecreasing kernel sequence.

    Raises MonotonicityError (with the offending entry) on any decrease
    beyond MONOTONE_TOL.
    """
    kernels = list(kernels)
    if not kernels:
        raise ValueError("need at least one kernel")
    prev = kernels[0].dense()
    for stage, k in enumerate(kernels[1:], start=1):
        cur = k.dense()
        if cur.shape != prev.shape:
            raise DimensionMismatchError("kernels in the sequence differ in size")
        drop = prev - cur
        worst = drop.max()
        if worst > MONOTONE_TOL:
            i, j = np.unravel_index(int(drop.argmax()), drop.shape)
            raise MonotonicityError(
                f"kernel sequence decreases by {worst:.3e} at entry ({i}, {j}) "
                f"between stages {stage - 1} and {stage}",
                entry=(int(i), int(j)),
                magnitude=float(worst),
            )
        prev = np.maximum(prev, cur)
    bound = max(k.bound for k in kernels)
    return KernelMatrix(prev, bound=bound)


@dataclass(frozen=True)
class DominationReport:
    passed: bool
    worst_violation: float
    location: tuple | None
    tol: float
    notes: str = ""


def check_domination(k1: KernelMatrix, k2: KernelMatrix, tol: float = MONOTONE_TOL) -> DominationReport:
    """Report whether K1 <= K2 + tol entrywise, locating the worst violation."""
    if k1.size != k2.size:
        raise DimensionMismatchError("kernels must have the same size")
    diff = k1.dense() - k2.dense()
    worst = float(diff.max(initial=0.0))
    if worst <= tol:
        return DominationReport(True, worst, None, tol)
    i, j = np.unravel_index(int(diff.argmax()), diff.shape)
    return DominationReport(False, worst, (int(i), int(j)), tol)


def identity_kernel(n: int) -> KernelMatrix:
    return KernelMatrix(np.eye(n), bound=1.0)
