"""Partitions, quotient pseudometrics, and region contraction.

The quotient metric is realized as zero-cost movement inside a class plus
parent-distance hops between classes: the canonical largest metric below
the parent distance that is compatible with the identification. On the
class graph this is all-pairs shortest path over the matrix of minimum
cross-class distances.

Distinct classes that end at distance 0 after quotienting are merged into
a single point, so every quotient is again a genuine metric space and all
covering/diameter operations apply unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyRegion, PartitionMismatch, UnknownPoint
from .spaces import FiniteMetricSpace, MetricSpace

_CHUNK = 512


def merge_intervals(intervals: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Sort and coalesce touching [start, end] index intervals."""
    ivs = sorted(intervals)
    out: list[list[int]] = []
    for s, e in ivs:
        if out and s <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    return tuple((s, e) for s, e in out)


class Partition:
    """Equivalence classes over a space's points.

    classes maps class_id -> frozenset of point ids; class_of is the
    inverse point -> class map. Classes must be disjoint, nonempty, and
    cover the parent point set exactly.
    """

    def __init__(self, parent_space: MetricSpace, classes: dict):
        self.parent_space = parent_space
        norm: dict = {}
        class_of: dict = {}
        for cid, members in classes.items():
            members = frozenset(members)
            if not members:
                raise PartitionMismatch(f"class {cid!r} is empty")
            for pid in members:
                if pid not in parent_space:
                    raise UnknownPoint(pid)
                if pid in class_of:
                    raise PartitionMismatch(
                        f"point {pid!r} in classes {class_of[pid]!r} and {cid!r}"
                    )
                class_of[pid] = cid
            norm[cid] = members
        if len(class_of) != parent_space.n:
            missing = set(parent_space.point_ids) - set(class_of)
            raise PartitionMismatch(f"points not covered: {sorted(map(str, missing))[:5]}")
        self.classes = norm
        self.class_of = class_of

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @classmethod
    def singletons(cls, space: MetricSpace) -> "Partition":
        return cls(space, {pid: {pid} for pid in space.point_ids})

    @classmethod
    def from_regions(cls, space: MetricSpace, regions: Sequence[Iterable]) -> "Partition":
        """Each region becomes one class; uncontracted points stay singletons.

        Class ids are assigned in first-member (lowest parent index) order,
        regions first, then the remaining singletons.
        """
        claimed: set = set()
        keyed = []
        for region in regions:
            members = frozenset(region)
            if not members:
                raise EmptyRegion("region with no points")
            for pid in members:
                if pid not in space:
                    raise UnknownPoint(pid)
                if pid in claimed:
                    raise PartitionMismatch(f"point {pid!r} claimed by two regions")
            claimed |= members
            keyed.append((min(space.index_of(p) for p in members), members))
        keyed.sort(key=lambda t: t[0])
        classes: dict = {}
        for i, (_, members) in enumerate(keyed):
            classes[f"R{i}"] = members
        for pid in space.point_ids:
            if pid not in claimed:
                classes[f"P{space.index_of(pid)}"] = {pid}
        return cls(space, classes)

    def compose(self, finer_to_coarser: "Partition") -> "Partition":
        """Join with a partition of this partition's quotient points.

        finer_to_coarser must partition a space whose point ids are this
        partition's class ids; the result partitions the original parent.
        """
        merged: dict = {}
        for pid, cid in self.class_of.items():
            top = finer_to_coarser.class_of.get(cid)
            if top is None:
                raise PartitionMismatch(f"quotient point {cid!r} missing in outer partition")
            merged.setdefault(top, set()).add(pid)
        return Partition(self.parent_space, merged)


@dataclass(frozen=True)
class Token:
    """A contracted region: one point at some level, with provenance back
    to the index range(s) of the original stream."""

    class_id: str
    level: int
    members: frozenset
    provenance: tuple[tuple[int, int], ...] = ()

    def member_count(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class QuotientSpace:
    """A quotient metric space together with the (effective) partition that
    produced it. The partition maps parent points to the quotient's point
    ids, including any zero-distance merges."""

    space: FiniteMetricSpace
    partition: Partition
    level: int
    tokens: tuple[Token, ...] = field(default=())

    def image_of(self, parent_point_id) -> str:
        return self.partition.class_of[parent_point_id]


def _metric_closure(d: np.ndarray) -> np.ndarray:
    """All-pairs shortest path by Floyd-Warshall relaxation, in place on a
    copy. Symmetry and the zero diagonal are preserved exactly."""
    d = d.copy()
    m = d.shape[0]
    for k in range(m):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def _min_cross_distances(space: MetricSpace, member_idx: list[np.ndarray]) -> np.ndarray:
    """D0[a, b] = min distance between a member of class a and of class b.

    Points are processed in class-sorted order so both axes reduce with
    minimum.reduceat; chunks land on whole classes apart from at most one
    straddler, folded in with a plain minimum.
    """
    m = len(member_idx)
    codes = np.empty(space.n, dtype=np.int64)
    for c, idx in enumerate(member_idx):
        codes[idx] = c
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    col_starts = np.searchsorted(sorted_codes, np.arange(m), side="left")

    d0 = np.full((m, m), np.inf)
    for s in range(0, space.n, _CHUNK):
        rows = order[s : s + _CHUNK]
        row_codes = sorted_codes[s : s + _CHUNK]
        block = space.distance_block(rows, order)
        per_class_cols = np.minimum.reduceat(block, col_starts, axis=1)
        uniq, starts = np.unique(row_codes, return_index=True)
        reduced = np.minimum.reduceat(per_class_cols, starts, axis=0)
        d0[uniq] = np.minimum(d0[uniq], reduced)
    np.fill_diagonal(d0, 0.0)
    return d0


def build_quotient(space: MetricSpace, partition: Partition, level: int = 1) -> QuotientSpace:
    """Quotient a space by a partition.

    Distances are the shortest-path pseudometric with free intra-class
    moves; classes ending at mutual distance 0 are merged. Quotient point
    ids are "L<level>_C<index>" with the index assigned in first-member
    order, so outputs are deterministic and bit-comparable.
    """
    if partition.parent_space is not space and tuple(
        partition.parent_space.point_ids
    ) != tuple(space.point_ids):
        raise PartitionMismatch("partition belongs to a different space")

    ordered = sorted(
        partition.classes.items(),
        key=lambda kv: min(space.index_of(p) for p in kv[1]),
    )
    member_idx = [
        np.array(sorted(space.index_of(p) for p in members), dtype=np.int64)
        for _, members in ordered
    ]

    d0 = _min_cross_distances(space, member_idx)
    closed = _metric_closure(d0)

    # Merge classes at quotient distance exactly 0 (true pseudometric quotient).
    m = len(ordered)
    parent = list(range(m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in np.argwhere(closed == 0.0):
        if a < b:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for c in range(m):
        groups.setdefault(find(c), []).append(c)

    # Deterministic ordering by smallest parent point index in the group.
    def group_key(cs: list[int]) -> int:
        return min(int(member_idx[c][0]) for c in cs)

    ordered_groups = sorted(groups.values(), key=group_key)
    reps = np.array([g[0] for g in ordered_groups], dtype=np.int64)
    mat = closed[np.ix_(reps, reps)]

    ids = [f"L{level}_C{i}" for i in range(len(ordered_groups))]
    qspace = FiniteMetricSpace(ids, mat, label=f"level{level}")

    eff_classes: dict = {}
    for qid, group in zip(ids, ordered_groups):
        members: set = set()
        for c in group:
            members |= ordered[c][1]
        eff_classes[qid] = members
    eff_partition = Partition(space, eff_classes)

    return QuotientSpace(space=qspace, partition=eff_partition, level=level)


def contract_region(
    space: MetricSpace,
    region: Iterable,
    stream_provenance: Iterable[tuple[int, int]] = (),
    level: int = 1,
) -> tuple[QuotientSpace, Token]:
    """Collapse one region to a single class; all other points stay
    singletons. Returns the quotient and the token for the region."""
    members = frozenset(region)
    if not members:
        raise EmptyRegion("cannot contract an empty region")
    for pid in members:
        if pid not in space:
            raise UnknownPoint(pid)
    part = Partition.from_regions(space, [members])
    q = build_quotient(space, part, level=level)
    token_id = q.partition.class_of[next(iter(members))]
    token = Token(
        class_id=token_id,
        level=level,
        members=frozenset(q.partition.classes[token_id]),
        provenance=merge_intervals(stream_provenance) if stream_provenance else (),
    )
    q = QuotientSpace(space=q.space, partition=q.partition, level=q.level, tokens=(token,))
    return q, token


def quotient_distance_oracle(space: MetricSpace, partition: Partition, a, b) -> float:
    """Brute-force quotient distance, independent of build_quotient.

    Relaxes chains of at most n hops, alternating free intra-class moves
    with single parent-distance hops, over the full point set. Used as the
    second route when checking the quotient construction.
    """
    ia, ib = space.index_of(a), space.index_of(b)
    n = space.n
    idx = np.arange(n)
    dmat = space.distance_block(idx, idx)

    class_members: dict = {
        cid: np.array(sorted(space.index_of(p) for p in members), dtype=np.int64)
        for cid, members in partition.classes.items()
    }

    def spread_free(cost: np.ndarray) -> np.ndarray:
        out = cost.copy()
        for members in class_members.values():
            out[members] = out[members].min()
        return out

    cost = np.full(n, np.inf)
    cost[ia] = 0.0
    cost = spread_free(cost)
    for _ in range(n):
        hopped = np.min(cost[:, None] + dmat, axis=0)
        new = spread_free(np.minimum(cost, hopped))
        if np.array_equal(new, cost):
            break
        cost = new
    return float(cost[ib])
