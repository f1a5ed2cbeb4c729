"""Shared primitives: bivariate samples, ECDFs, nearest neighbors, quantile ranks.

Everything in this module is deterministic and pure. Samples are immutable
after construction, so fitted objects holding a reference to one can be
scored from parallel workers without locking.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "Orientation",
    "Sample2D",
    "ScoreVector",
    "ecdf1",
    "knn_indices",
    "rect_count",
    "threshold_index",
]


class Orientation(enum.Enum):
    """Whether large scores mean low density (SPARSITY) or high density."""

    SPARSITY = "sparsity"
    CONCENTRATION = "concentration"


class Sample2D:
    """Immutable ordered set of bivariate points.

    Point order is stable: index ``i`` identifies the same point for the
    lifetime of the object, which is what ties scores, labels and metrics
    together downstream.
    """

    __slots__ = ("_pts",)

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1 and pts.size == 2:
            pts = pts.reshape(1, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample contains non-finite coordinates")
        pts = pts.copy()
        pts.setflags(write=False)
        self._pts = pts

    @property
    def points(self) -> np.ndarray:
        """Read-only (n, 2) array of coordinates."""
        return self._pts

    @property
    def n(self) -> int:
        return self._pts.shape[0]

    def column(self, j: int) -> np.ndarray:
        return self._pts[:, j]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Sample2D(n={self.n})"


class ScoreVector:
    """Measure evaluations at the sample points, with their orientation."""

    __slots__ = ("scores", "orientation")

    def __init__(self, scores, orientation: Orientation):
        arr = np.asarray(scores, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("scores must be a nonempty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("scores contain non-finite values")
        arr = arr.copy()
        arr.setflags(write=False)
        self.scores = arr
        self.orientation = orientation

    @property
    def n(self) -> int:
        return self.scores.size


def ecdf1(column, t):
    """Right-continuous empirical CDF of a 1-D sample, evaluated at ``t``.

    ``t`` may be a scalar or an array; returns the fraction of entries <= t.
    """
    col = np.asarray(column, dtype=float)
    if col.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(col)):
        raise ValueError("sample contains non-finite values")
    srt = np.sort(col)
    out = np.searchsorted(srt, t, side="right") / col.size
    if np.isscalar(t):
        return float(out)
    return out


def rect_count(sample: Sample2D, lo, hi) -> int:
    """Number of sample points inside the closed rectangle [lo, hi].

    Bounds are inclusive on all edges (boundary mass is measure-zero for
    continuous data, so the convention only matters for exact-tie inputs).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo[0] > hi[0] or lo[1] > hi[1]:
        raise ValueError("degenerate rectangle: lo must be <= hi componentwise")
    pts = sample.points
    inside = (
        (pts[:, 0] >= lo[0])
        & (pts[:, 0] <= hi[0])
        & (pts[:, 1] >= lo[1])
        & (pts[:, 1] <= hi[1])
    )
    return int(np.count_nonzero(inside))


def _k_smallest(dist: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest distances, ties broken by ascending index."""
    n = dist.size
    if k == n:
        cand = np.arange(n)
    else:
        part = np.argpartition(dist, k - 1)[:k]
        v = dist[part].max()
        # pull in every index tied with the boundary value so the index
        # tie-break is applied over the full tie group
        cand = np.flatnonzero(dist <= v)
    order = np.lexsort((cand, dist[cand]))
    return cand[order[:k]]


def knn_indices(sample: Sample2D, query, k: int) -> np.ndarray:
    """Indices of the k nearest sample points to ``query`` (Euclidean).

    Sorted ascending by distance; exact distance ties resolve to the lower
    sample index so repeated runs are identical.
    """
    if not (1 <= k <= sample.n):
        raise ValueError(f"k={k} out of range [1, {sample.n}]")
    q = np.asarray(query, dtype=float)
    if not np.all(np.isfinite(q)):
        raise ValueError("query must be finite")
    d = sample.points - q
    dist = np.hypot(d[:, 0], d[:, 1])
    return _k_smallest(dist, k)


def threshold_index(n: int, alpha: float, orientation: Orientation) -> int:
    """1-based ascending order-statistic rank of the HDR score threshold.

    Concentration measures keep the top scores, so the cut sits at the
    alpha-quantile rank floor(alpha*n); sparsity measures keep the bottom,
    cutting at ceil((1-alpha)*n). Ranks clamp to [1, n] for tiny samples.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    # the 1e-9 nudge undoes float representation error in alpha*n
    # (e.g. 0.29*100 == 28.999999999999996)
    if orientation is Orientation.CONCENTRATION:
        r = math.floor(alpha * n + 1e-9)
        return max(1, r)
    r = math.ceil((1.0 - alpha) * n - 1e-9)
    return min(n, max(1, r))
