"""Separating functions on finite metric spaces and their descent through
quotient towers.

The separator between disjoint sets A and B is the closed-form

    f(x) = d(x, A) / (d(x, A) + d(x, B))

which is 0 on A, 1 on B, and Lipschitz with constant 1/gap(A, B). Exact
level sets are measure-zero in floating point, so fiber quotients bin the
values; the values 0 and 1 are always pinned to their own fibers so the
A-fiber and B-fiber stay distinct classes under any binning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BinningError,
    IncompatiblePartition,
    OverlappingSets,
    UnknownPoint,
    ZeroGap,
)
from .quotient import Partition, QuotientSpace, build_quotient
from .spaces import FiniteMetricSpace, MetricSpace

A_SIDE = "A_side"
B_SIDE = "B_side"

CSV_HEADER_SEPARATOR = ["point_id", "f_value", "set"]
CSV_HEADER_SEPARATION_REPORT = [
    "level",
    "n_points",
    "A_image_size",
    "B_image_size",
    "disjoint",
    "f_A",
    "f_B",
    "pass",
]


@dataclass(frozen=True)
class Separator:
    """Per-point values in [0, 1] with designated zero set A and one set B."""

    space: MetricSpace
    values: dict
    zero_set: frozenset
    one_set: frozenset

    def __post_init__(self):
        if self.zero_set & self.one_set:
            raise OverlappingSets("zero set and one set intersect")
        for pid, v in self.values.items():
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"separator value {v!r} at {pid!r} outside [0, 1]")
        for a in self.zero_set:
            if self.values[a] != 0.0:
                raise ValueError(f"zero-set point {a!r} has value {self.values[a]!r}")
        for b in self.one_set:
            if self.values[b] != 1.0:
                raise ValueError(f"one-set point {b!r} has value {self.values[b]!r}")

    def value(self, point_id) -> float:
        if point_id not in self.values:
            raise UnknownPoint(point_id)
        return self.values[point_id]


def gap(space: MetricSpace, a_set, b_set) -> float:
    """min over a in A, b in B of dist(a, b)."""
    ai = np.array([space.index_of(p) for p in a_set], dtype=np.int64)
    bi = np.array([space.index_of(p) for p in b_set], dtype=np.int64)
    return float(space.distance_block(ai, bi).min())


def urysohn_separator(space: MetricSpace, a_set, b_set) -> Separator:
    """Closed-form separating function for disjoint point sets at positive gap."""
    a_set, b_set = frozenset(a_set), frozenset(b_set)
    if not a_set or not b_set:
        raise OverlappingSets("both sets must be nonempty")
    if a_set & b_set:
        raise OverlappingSets(f"sets share points: {sorted(map(str, a_set & b_set))[:5]}")
    if gap(space, a_set, b_set) <= 0.0:
        raise ZeroGap("zero set and one set touch at distance 0")

    ai = np.array(sorted(space.index_of(p) for p in a_set), dtype=np.int64)
    bi = np.array(sorted(space.index_of(p) for p in b_set), dtype=np.int64)
    idx = np.arange(space.n)
    d_a = space.distance_block(idx, ai).min(axis=1)
    d_b = space.distance_block(idx, bi).min(axis=1)
    values = {}
    for i, pid in enumerate(space.point_ids):
        da, db = float(d_a[i]), float(d_b[i])
        values[pid] = da / (da + db)
    return Separator(space=space, values=values, zero_set=a_set, one_set=b_set)


def classify_threshold(f: Separator, point_id) -> str:
    """B_side iff f(x) > 1/2; ties classify as A_side (strict rule)."""
    return B_SIDE if f.value(point_id) > 0.5 else A_SIDE


# ---------------------------------------------------------------------------
# Fiber binning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberPartition:
    """Binned level sets of a separator. Bin 0 holds exactly the value 0 and
    the last bin exactly the value 1; interior bins split (0, 1) uniformly."""

    partition: Partition
    bin_edges: tuple
    bin_of: dict  # class_id -> bin index


def _fiber_index(v: float, n_bins: int) -> int:
    if v == 0.0:
        return 0
    if v == 1.0:
        return n_bins - 1
    interior = n_bins - 2
    if interior <= 0:
        raise BinningError(
            f"value {v!r} has no fiber: n_bins={n_bins} leaves no interior bins"
        )
    j = math.ceil(v * interior)
    return min(max(j, 1), interior)


def _fiber_representative(bin_index: int, n_bins: int) -> float:
    if bin_index == 0:
        return 0.0
    if bin_index == n_bins - 1:
        return 1.0
    return (bin_index - 0.5) / (n_bins - 2)


def fiber_quotient(
    space: MetricSpace, f: Separator, n_bins: int, level: int = 1
) -> tuple[QuotientSpace, FiberPartition, Separator]:
    """Quotient a space along the binned level sets of a separator.

    Returns the quotient, the fiber bookkeeping, and the descended
    separator carrying each bin's representative value (exact 0 and 1 on
    the images of A and B).
    """
    if n_bins < 2:
        raise BinningError(f"need at least 2 bins, got {n_bins}")
    by_bin: dict[int, set] = {}
    for pid in space.point_ids:
        by_bin.setdefault(_fiber_index(f.values[pid], n_bins), set()).add(pid)

    raw = Partition(space, {f"B{b}": members for b, members in sorted(by_bin.items())})
    q = build_quotient(space, raw, level=level)

    # Zero-distance merges cannot legally cross bins (equal distance rows
    # force equal separator values); treat any crossover as a hard error.
    bin_of: dict = {}
    for qid, members in q.partition.classes.items():
        bins = {_fiber_index(f.values[p], n_bins) for p in members}
        if len(bins) > 1:
            raise BinningError(f"quotient class {qid!r} spans fibers {sorted(bins)}")
        bin_of[qid] = bins.pop()

    edges = tuple(
        j / (n_bins - 2) for j in range(n_bins - 1)
    ) if n_bins > 2 else (0.0, 1.0)
    fiber = FiberPartition(partition=q.partition, bin_edges=edges, bin_of=bin_of)

    values = {qid: _fiber_representative(b, n_bins) for qid, b in bin_of.items()}
    zero = frozenset(q.partition.class_of[a] for a in f.zero_set)
    one = frozenset(q.partition.class_of[b] for b in f.one_set)
    descended = Separator(space=q.space, values=values, zero_set=zero, one_set=one)
    return q, fiber, descended


def descend_separator(
    f: Separator,
    partition: Partition,
    quotient_space: FiniteMetricSpace | None = None,
    level: int = 1,
) -> Separator:
    """Descend f through a partition on which it is exactly constant.

    The result satisfies f = f_bar o q bit-exactly on stored values.
    Constancy is checked by exact float equality; a class mixing two
    values raises IncompatiblePartition naming the class and both values.
    """
    for cid, members in partition.classes.items():
        vals = {f.values[p] for p in members}
        if len(vals) > 1:
            v1, v2 = sorted(vals)[:2]
            raise IncompatiblePartition(cid, v1, v2)

    if quotient_space is None:
        q = build_quotient(f.space, partition, level=level)
        space = q.space
        classes = q.partition.classes
        class_of = q.partition.class_of
        # Re-check on effective classes: zero-distance merges may have
        # joined raw classes carrying different values.
        for cid, members in classes.items():
            vals = {f.values[p] for p in members}
            if len(vals) > 1:
                v1, v2 = sorted(vals)[:2]
                raise IncompatiblePartition(cid, v1, v2)
    else:
        if set(quotient_space.point_ids) != set(partition.classes.keys()):
            raise IncompatiblePartition("<space>", 0.0, 0.0)
        space = quotient_space
        classes = partition.classes
        class_of = partition.class_of

    values = {cid: f.values[next(iter(members))] for cid, members in classes.items()}
    zero = frozenset(class_of[a] for a in f.zero_set)
    one = frozenset(class_of[b] for b in f.one_set)
    return Separator(space=space, values=values, zero_set=zero, one_set=one)


# ---------------------------------------------------------------------------
# Recursive towers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelRow:
    level: int
    n_points: int
    a_image_size: int
    b_image_size: int
    disjoint: bool
    f_a: float
    f_b: float
    passed: bool

    def to_csv_row(self) -> list[str]:
        return [
            str(self.level),
            str(self.n_points),
            str(self.a_image_size),
            str(self.b_image_size),
            "true" if self.disjoint else "false",
            repr(self.f_a),
            repr(self.f_b),
            "true" if self.passed else "false",
        ]


@dataclass(frozen=True)
class SeparationReport:
    rows: tuple[LevelRow, ...]
    passed: bool


def recursive_separation_check(tower, a0_set, b0_set) -> SeparationReport:
    """Verify that separation survives every quotient map of a tower.

    At each level k the base separator is descended through maps[k]
    (raising IncompatiblePartition tagged with k if the map is not exactly
    value-compatible), the images of A and B are taken, and the report
    asserts they stay disjoint with descended values exactly 0 and 1.
    """
    a_img = frozenset(a0_set)
    b_img = frozenset(b0_set)
    f = urysohn_separator(tower.levels[0], a_img, b_img)

    def make_row(level: int, space, fun: Separator, a, b) -> LevelRow:
        va = {fun.values[p] for p in a}
        vb = {fun.values[p] for p in b}
        disjoint = not (a & b)
        ok = disjoint and va == {0.0} and vb == {1.0}
        return LevelRow(
            level=level,
            n_points=space.n,
            a_image_size=len(a),
            b_image_size=len(b),
            disjoint=disjoint,
            f_a=min(va),
            f_b=max(vb),
            passed=ok,
        )

    rows = [make_row(0, tower.levels[0], f, a_img, b_img)]
    for k, part in enumerate(tower.maps):
        try:
            f = descend_separator(f, part, quotient_space=tower.levels[k + 1])
        except IncompatiblePartition as exc:
            raise IncompatiblePartition(exc.class_id, exc.v1, exc.v2, level=k) from None
        a_img = frozenset(part.class_of[a] for a in a_img)
        b_img = frozenset(part.class_of[b] for b in b_img)
        rows.append(make_row(k + 1, tower.levels[k + 1], f, a_img, b_img))

    return SeparationReport(rows=tuple(rows), passed=all(r.passed for r in rows))


def build_fiber_tower(space: MetricSpace, a_set, b_set, bins_per_level, epsilon: float):
    """Construct a tower of fiber quotients with the given bin schedule.

    Covers are computed at the single resolution epsilon so the tower
    doubles as a capacity report.
    """
    from .cover import cover_auto
    from .hierarchy import Hierarchy
    from .quotient import Token

    f = urysohn_separator(space, a_set, b_set)
    levels = [space]
    maps: list[Partition] = []
    tokens: list[Token] = []
    covers = [cover_auto(space, epsilon)]
    for i, nb in enumerate(bins_per_level):
        q, _, f = fiber_quotient(levels[-1], f, int(nb), level=i + 1)
        maps.append(q.partition)
        levels.append(q.space)
        for qid in q.space.point_ids:
            tokens.append(
                Token(
                    class_id=qid,
                    level=i + 1,
                    members=frozenset(q.partition.classes[qid]),
                )
            )
        covers.append(cover_auto(q.space, epsilon))

    n_per_level = [c.n for c in covers]
    rho_hat = [
        n_per_level[k] / n_per_level[k + 1] for k in range(len(n_per_level) - 1)
    ]
    return Hierarchy(
        levels=levels,
        maps=maps,
        tokens=tuple(tokens),
        epsilon=epsilon,
        n_per_level=n_per_level,
        rho_hat=rho_hat,
        covers=covers,
        verdict="CONDENSED",
    )
