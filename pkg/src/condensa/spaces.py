"""Finite metric spaces.

A space is a finite point set with a distance function. Four concrete
flavors cover everything the library needs:

  FiniteMetricSpace  validated square distance matrix (the general case)
  EuclideanSpace     points given by coordinates, distances computed lazily
                     (never materializes the n x n matrix, so streams with
                     10^4 samples stay cheap)
  SegmentSpace       evenly spaced samples of a 1-D segment, dist = |i-j|*h
  PathSpace          arc-length metric along an ordered sample chain

Distances are allowed to vanish between distinct points (pseudometrics),
which is what repeated stream samples produce; quotient construction
merges such points explicitly.

All spaces are immutable after construction and safe to share across
threads; every operation here is a pure function of its inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import (
    AsymmetricDistance,
    EmptySpace,
    MatrixFormatError,
    NegativeDistance,
    NonzeroDiagonal,
    TriangleViolation,
)

# Relative triangle-inequality tolerance: quotient distances are built by
# shortest path and accumulate rounding, so exact comparison is too strict.
TRI_TOL_REL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class MetricSpace:
    """Shared interface: ids, index lookup, block distance computation."""

    point_ids: tuple
    label: str | None

    def __init__(self, point_ids: Sequence, label: str | None = None):
        self.point_ids = tuple(point_ids)
        self.label = label
        self._index = {pid: i for i, pid in enumerate(self.point_ids)}
        if len(self._index) != len(self.point_ids):
            raise MatrixFormatError("duplicate point ids")
        if not self.point_ids:
            raise EmptySpace("space has no points")

    @property
    def n(self) -> int:
        return len(self.point_ids)

    def index_of(self, point_id) -> int:
        try:
            return self._index[point_id]
        except KeyError:
            from .errors import UnknownPoint

            raise UnknownPoint(point_id) from None

    def __contains__(self, point_id) -> bool:
        return point_id in self._index

    def distance(self, i: int, j: int) -> float:
        raise NotImplementedError

    def distance_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Dense (len(rows), len(cols)) block of pairwise distances."""
        raise NotImplementedError

    def row(self, i: int) -> np.ndarray:
        return self.distance_block(np.array([i]), np.arange(self.n))[0]

    def diameter(self) -> float:
        """Max pairwise distance; 0 for a singleton."""
        best = 0.0
        idx = np.arange(self.n)
        for start in range(0, self.n, 1024):
            block = self.distance_block(idx[start : start + 1024], idx)
            best = max(best, float(block.max()))
        return best

    def subspace(self, indices: Sequence[int], label: str | None = None) -> "FiniteMetricSpace":
        """Materialize the induced submatrix as a validated space."""
        idx = np.asarray(list(indices), dtype=np.int64)
        mat = self.distance_block(idx, idx)
        ids = [self.point_ids[i] for i in idx]
        return FiniteMetricSpace(ids, mat, label=label, _prevalidated=True)

    def __repr__(self):  # pragma: no cover - debugging aid
        name = self.label or type(self).__name__
        return f"<{type(self).__name__} {name!r} n={self.n}>"


class FiniteMetricSpace(MetricSpace):
    """Point set with an explicit, validated distance matrix."""

    def __init__(
        self,
        point_ids: Sequence,
        dist: np.ndarray,
        label: str | None = None,
        _prevalidated: bool = False,
    ):
        super().__init__(point_ids, label)
        dist = np.asarray(dist, dtype=np.float64)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise MatrixFormatError(f"matrix shape {dist.shape} is not square")
        if dist.shape[0] != self.n:
            raise MatrixFormatError(
                f"{self.n} point ids but matrix of order {dist.shape[0]}"
            )
        if not _prevalidated:
            _check_axioms(dist)
        self.dist = _freeze(dist)

    def distance(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def distance_block(self, rows, cols) -> np.ndarray:
        return self.dist[np.ix_(np.asarray(rows), np.asarray(cols))]

    def diameter(self) -> float:
        return float(self.dist.max())


class EuclideanSpace(MetricSpace):
    """Points in R^k under the euclidean rule; distances computed on demand."""

    def __init__(self, point_ids: Sequence, coords: np.ndarray, label: str | None = None):
        super().__init__(point_ids, label)
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[0] != self.n:
            raise MatrixFormatError(f"coords shape {coords.shape} does not match ids")
        if not np.all(np.isfinite(coords)):
            raise MatrixFormatError("coordinates must be finite")
        self.coords = _freeze(coords)

    def distance(self, i: int, j: int) -> float:
        d = self.coords[i] - self.coords[j]
        return float(np.sqrt(np.dot(d, d)))

    def distance_block(self, rows, cols) -> np.ndarray:
        a = self.coords[np.asarray(rows)]
        b = self.coords[np.asarray(cols)]
        # Accumulate squared differences one dimension at a time: avoids the
        # (rows, cols, k) temporary, which dominates at stream scale.
        out = (a[:, 0][:, None] - b[:, 0][None, :]) ** 2
        for j in range(1, a.shape[1]):
            out += (a[:, j][:, None] - b[:, j][None, :]) ** 2
        return np.sqrt(out, out=out)


class SegmentSpace(MetricSpace):
    """Evenly spaced samples of a segment of length L at resolution h.

    dist(i, j) = |i - j| * h, computed from index separation so the metric
    is exactly translation invariant along the index axis. Holds
    floor(L/h) + 1 samples. Covering queries against this space must use
    eps >= 4h so sampling distorts the covering number by at most one
    ball; the cover solvers enforce that.
    """

    def __init__(self, length: float, h: float, label: str | None = None):
        if length <= 0:
            raise MatrixFormatError("segment length must be positive")
        if h <= 0:
            raise MatrixFormatError("resolution h must be positive")
        n = int(np.floor(length / h + 1e-12)) + 1
        super().__init__([str(i) for i in range(n)], label or f"segment L={length}")
        self.length = float(length)
        self.h = float(h)

    def distance(self, i: int, j: int) -> float:
        return abs(i - j) * self.h

    def distance_block(self, rows, cols) -> np.ndarray:
        r = np.asarray(rows, dtype=np.float64)
        c = np.asarray(cols, dtype=np.float64)
        return np.abs(r[:, None] - c[None, :]) * self.h

    def diameter(self) -> float:
        return (self.n - 1) * self.h


class PathSpace(MetricSpace):
    """Arc-length metric on an ordered chain of samples.

    dist(i, j) = |cum[j] - cum[i]| where cum is the running sum of
    consecutive hop lengths. This is the flat 1-D geometry of a stream
    before any contraction; a stream of total path length L is isometric
    to a (non-uniform) segment of length L.
    """

    def __init__(self, hop_lengths: np.ndarray, point_ids: Sequence | None = None,
                 label: str | None = None):
        hops = np.asarray(hop_lengths, dtype=np.float64)
        if hops.ndim != 1 or np.any(hops < 0) or not np.all(np.isfinite(hops)):
            raise MatrixFormatError("hop lengths must be finite and nonnegative")
        n = hops.size + 1
        ids = point_ids if point_ids is not None else [str(i) for i in range(n)]
        super().__init__(ids, label)
        cum = np.concatenate([[0.0], np.cumsum(hops)])
        self.cum = _freeze(cum)

    def distance(self, i: int, j: int) -> float:
        return abs(float(self.cum[j]) - float(self.cum[i]))

    def distance_block(self, rows, cols) -> np.ndarray:
        r = self.cum[np.asarray(rows)]
        c = self.cum[np.asarray(cols)]
        return np.abs(r[:, None] - c[None, :])

    def diameter(self) -> float:
        return float(self.cum[-1])


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_axioms(dist: np.ndarray) -> None:
    """Raise the first violated metric axiom with witnessing indices.

    Check order: finiteness, diagonal, nonnegativity, symmetry, triangle.
    Triangle uses the relative tolerance TRI_TOL_REL * max entry.
    """
    n = dist.shape[0]
    if not np.all(np.isfinite(dist)):
        i, j = np.argwhere(~np.isfinite(dist))[0]
        raise MatrixFormatError(f"dist[{i}][{j}] is not finite")

    diag = np.diagonal(dist)
    nz = np.nonzero(diag != 0.0)[0]
    if nz.size:
        i = int(nz[0])
        raise NonzeroDiagonal(i, float(dist[i, i]))

    neg = np.argwhere(dist < 0.0)
    if neg.size:
        i, j = map(int, neg[0])
        raise NegativeDistance(i, j, float(dist[i, j]))

    asym = np.argwhere(dist != dist.T)
    if asym.size:
        i, j = map(int, asym[0])
        if i > j:
            i, j = j, i
        raise AsymmetricDistance(i, j, float(dist[i, j]), float(dist[j, i]))

    tol = TRI_TOL_REL * float(dist.max()) if n else 0.0
    # One min-plus sweep finds the tightest two-hop bound; a second, slower
    # pass recovers witness indices only when a violation actually exists.
    best = np.full_like(dist, np.inf)
    buf = np.empty_like(dist)
    for j in range(n):
        np.add(dist[:, j][:, None], dist[j, :][None, :], out=buf)
        np.minimum(best, buf, out=buf)
        best, buf = buf, best
    if np.any(best < dist - tol):
        for j in range(n):
            slack = dist[:, j][:, None] + dist[j, :][None, :] - dist
            bad = np.argwhere(slack < -tol)
            if bad.size:
                i, k = map(int, bad[0])
                raise TriangleViolation(i, j, k, float(-slack[i, k]))


def validate_metric(
    dist_matrix, point_ids: Sequence | None = None, label: str | None = None
) -> FiniteMetricSpace:
    """Validate a square matrix of reals as a finite (pseudo)metric space.

    Returns the validated space or raises a structured error naming the
    first violated axiom and its witnessing indices.
    """
    mat = np.asarray(dist_matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise MatrixFormatError(f"matrix shape {mat.shape} is not square")
    if mat.shape[0] == 0:
        raise EmptySpace("matrix of order 0")
    ids = point_ids if point_ids is not None else [str(i) for i in range(mat.shape[0])]
    return FiniteMetricSpace(ids, mat, label=label)


def diameter(space: MetricSpace) -> float:
    """Max over all pairwise distances; 0 for a singleton. EmptySpace is
    unrepresentable (constructors reject zero points)."""
    return space.diameter()


def tri_tol(space: MetricSpace) -> float:
    """The space's triangle/comparison tolerance: TRI_TOL_REL * diameter."""
    return TRI_TOL_REL * space.diameter()
