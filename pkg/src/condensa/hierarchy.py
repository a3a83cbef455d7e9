"""The condensation engine: streams, policies, and quotient towers.

A stream induces two geometries. Its spatial space is the sample set
under the declared (euclidean) distance rule, which is what condensation
policies inspect. Its temporal space is the arc-length metric along the
sample order: flat, isometric to a segment of the stream's total path
length, and the geometry that uncontracted search pays for.

build_hierarchy repeatedly selects validated regions (policy-dependent),
contracts them through the quotient module, and recomputes the covering
number at a single fixed resolution epsilon. Compression is measured,
never assumed: rho_hat records the achieved per-step ratios, and
verify_telescoping checks a declared rho against them separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cover import CoverResult, cover_auto
from .errors import InvalidRho, MatrixFormatError
from .quotient import Partition, Token, build_quotient, merge_intervals
from .spaces import EuclideanSpace, MetricSpace, PathSpace

CSV_HEADER_HIERARCHY = ["level", "n_points", "N_eps", "method", "rho_hat", "n_tokens"]
CSV_HEADER_DEPTH = ["L", "N0", "D_achieved", "D_formula"]

VERDICT_BUDGET = "BUDGET_REACHED"
VERDICT_MAX_DEPTH = "MAX_DEPTH"
VERDICT_INCOMPRESSIBLE = "INCOMPRESSIBLE"


class Stream:
    """Ordered samples in R^k with the euclidean rule and a total path
    length equal to the sum of consecutive-sample distances."""

    def __init__(self, coords, seed: int = 0, label: str | None = None):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[0] < 2:
            raise MatrixFormatError("a stream needs at least 2 samples of equal dimension")
        if not np.all(np.isfinite(coords)):
            raise MatrixFormatError("stream coordinates must be finite")
        coords = np.ascontiguousarray(coords)
        coords.flags.writeable = False
        self.coords = coords
        self.seed = int(seed)
        self.label = label
        self._hops = np.sqrt(((coords[1:] - coords[:-1]) ** 2).sum(axis=1))
        self.length = float(self._hops.sum())
        self._spatial: EuclideanSpace | None = None
        self._temporal: PathSpace | None = None

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def spatial_space(self) -> EuclideanSpace:
        if self._spatial is None:
            ids = [str(i) for i in range(self.n)]
            self._spatial = EuclideanSpace(ids, self.coords, label=self.label)
        return self._spatial

    def temporal_space(self) -> PathSpace:
        """Arc-length metric along the sample order: the flat geometry of
        raw history, before any contraction."""
        if self._temporal is None:
            ids = [str(i) for i in range(self.n)]
            self._temporal = PathSpace(self._hops, ids, label=self.label)
        return self._temporal

    def max_hop(self) -> float:
        return float(self._hops.max())


@dataclass(frozen=True)
class CondensationPolicy:
    """How validated regions are found.

    kind="window": runs of window_w consecutive sequence elements whose
    point set has internal diameter <= internal_diameter_cap.
    kind="motif": recurring subsequences of length motif_len that match a
    template pointwise within the cap, with at least motif_min_repeats
    occurrences; each occurrence becomes a region.
    kind="fiber": binned level sets of the separator between the current
    sequence's first and last points.

    Every kind admits only regions with internal diameter <= the cap.
    """

    kind: str
    internal_diameter_cap: float
    window_w: int = 2
    motif_len: int = 8
    motif_min_repeats: int = 2
    n_bins: int = 16

    def __post_init__(self):
        if self.kind not in ("window", "motif", "fiber"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.internal_diameter_cap <= 0:
            raise ValueError("internal_diameter_cap must be positive")
        if self.window_w < 2 and self.kind == "window":
            raise ValueError("window_w must be at least 2")
        if self.kind == "motif" and (self.motif_len < 2 or self.motif_min_repeats < 1):
            raise ValueError("motif_len >= 2 and motif_min_repeats >= 1 required")
        if self.kind == "fiber" and self.n_bins < 2:
            raise ValueError("n_bins must be at least 2")


@dataclass
class Hierarchy:
    """A built condensation tower.

    levels[0] is the stream's spatial space; maps[k] sends level-k points
    to level-(k+1) points; n_per_level[k] is the covering number of level
    k at the tower's epsilon. rho_hat holds the measured per-step ratios
    N_k / N_{k+1}. sequences keeps the temporal order of each level's
    points (runs of equal ids collapsed), which navigation and the window
    policies rely on.
    """

    levels: list
    maps: list
    tokens: tuple
    epsilon: float
    n_per_level: list
    rho_hat: list
    covers: list = field(default_factory=list)
    verdict: str = VERDICT_BUDGET
    sequences: list = field(default_factory=list)
    provenances: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.levels) != len(self.maps) + 1:
            raise ValueError("need exactly one map per adjacent level pair")
        if len(self.n_per_level) != len(self.levels):
            raise ValueError("need one covering number per level")
        for k in range(len(self.n_per_level) - 1):
            if self.n_per_level[k + 1] > self.n_per_level[k]:
                raise ValueError(
                    f"covering number rose from level {k} to {k + 1}: "
                    f"{self.n_per_level[k]} -> {self.n_per_level[k + 1]}"
                )

    @property
    def depth(self) -> int:
        return len(self.maps)

    def image_at_level(self, point_id, level: int):
        """Map a level-0 point id up to its class at the given level."""
        pid = point_id
        for k in range(level):
            pid = self.maps[k].class_of[pid]
        return pid

    def diameters(self) -> list[float]:
        return [lvl.diameter() for lvl in self.levels]

    def diameter_ratios(self) -> list[float]:
        """Per-step diameter shrink factors, reported alongside rho_hat;
        the two ratios are measured separately and not asserted equal."""
        d = self.diameters()
        return [
            d[k] / d[k + 1] if d[k + 1] > 0 else float("inf")
            for k in range(len(d) - 1)
        ]

    def report_rows(self) -> list[list[str]]:
        rows = []
        for k, space in enumerate(self.levels):
            rho = repr(self.rho_hat[k]) if k < len(self.rho_hat) else ""
            n_tok = sum(1 for t in self.tokens if t.level == k)
            rows.append(
                [
                    str(k),
                    str(space.n),
                    str(self.n_per_level[k]),
                    self.covers[k].method if self.covers else "",
                    rho,
                    str(n_tok),
                ]
            )
        return rows


# ---------------------------------------------------------------------------
# Depth formula and telescoping
# ---------------------------------------------------------------------------

def required_depth(n0: int, d: int, rho: float) -> int:
    """ceil(log_rho(n0 / d)), clamped below at 0, in exact arithmetic.

    Smallest D with rho^D >= n0/d, found by exact Fraction products so
    borderline cases like log2(1024) never wobble on float rounding.
    """
    if rho <= 1:
        raise InvalidRho(rho)
    if n0 < 1 or d < 1:
        raise ValueError("n0 and d must be positive integers")
    target = Fraction(n0, d)
    power = Fraction(1)
    rho_exact = Fraction(rho)
    depth = 0
    while power < target:
        power *= rho_exact
        depth += 1
    return depth


@dataclass(frozen=True)
class TelescopingReport:
    rho: float
    n_per_level: tuple
    step_ok: tuple  # hypothesis N_{k+1} <= N_k / rho per step
    first_violation: int | None
    bound_ok: bool  # N_D <= rho^-D N_0, checked only if all steps hold
    vacuous: bool
    passed: bool


def verify_telescoping(hierarchy: Hierarchy, rho: float) -> TelescopingReport:
    """Check the per-step compression hypothesis for a declared rho and,
    when it holds everywhere, the telescoped bound at the top level.

    All comparisons run in exact rational arithmetic on the integer
    covering numbers.
    """
    if rho <= 1:
        raise InvalidRho(rho)
    ns = [int(x) for x in hierarchy.n_per_level]
    rho_exact = Fraction(rho)
    step_ok = []
    first_violation = None
    for k in range(len(ns) - 1):
        ok = Fraction(ns[k + 1]) * rho_exact <= Fraction(ns[k])
        step_ok.append(ok)
        if not ok and first_violation is None:
            first_violation = k
    depth = len(ns) - 1
    if depth == 0:
        return TelescopingReport(rho, tuple(ns), (), None, True, True, True)
    if first_violation is None:
        bound_ok = Fraction(ns[-1]) * rho_exact**depth <= Fraction(ns[0])
    else:
        bound_ok = False
    passed = first_violation is None and bound_ok
    return TelescopingReport(
        rho, tuple(ns), tuple(step_ok), first_violation, bound_ok, False, passed
    )


# ---------------------------------------------------------------------------
# Region discovery
# ---------------------------------------------------------------------------

def _set_diameter(space: MetricSpace, ids) -> float:
    idx = np.array(sorted(space.index_of(p) for p in ids), dtype=np.int64)
    if idx.size == 1:
        return 0.0
    return float(space.distance_block(idx, idx).max())


def _window_regions(space: MetricSpace, sequence, w: int, cap: float) -> list[frozenset]:
    """Disjoint leftmost-first windows of w consecutive sequence elements
    with internal diameter within the cap."""
    n = len(sequence)
    regions = []
    claimed: set = set()
    i = 0
    while i + w <= n:
        ids = frozenset(sequence[i : i + w])
        if len(ids) < 2 or ids & claimed:
            i += 1
            continue
        if _set_diameter(space, ids) <= cap:
            regions.append(ids)
            claimed |= ids
            i += w
        else:
            i += 1
    return regions


def _motif_match_offsets(
    space: MetricSpace, seq_idx: np.ndarray, template_start: int, m: int, cap: float
) -> np.ndarray:
    """Offsets j where the window at j matches the template pointwise
    within the cap. Exhaustive over all offsets, vectorized per position."""
    n = seq_idx.size
    n_off = n - m + 1
    worst = np.zeros(n_off)
    for k in range(m):
        trow = space.distance_block(
            np.array([seq_idx[template_start + k]]), seq_idx[k : n_off + k]
        )[0]
        np.maximum(worst, trow, out=worst)
    return np.nonzero(worst <= cap)[0]


def find_motif_occurrences(
    space: MetricSpace, sequence, motif_len: int, min_repeats: int, cap: float
) -> list[list[int]]:
    """All motif occurrence groups: leftmost-first templates, non-overlapping
    occurrences, match when the max pointwise distance is within the cap.

    Returns groups of window start offsets (each group one motif).
    """
    seq_idx = np.array([space.index_of(p) for p in sequence], dtype=np.int64)
    n = seq_idx.size
    m = motif_len
    claimed = np.zeros(n, dtype=bool)
    groups: list[list[int]] = []
    t = 0
    while t + m <= n:
        if claimed[t : t + m].any():
            t += 1
            continue
        offsets = _motif_match_offsets(space, seq_idx, t, m, cap)
        picked: list[int] = []
        taken = claimed.copy()
        for j in offsets:
            j = int(j)
            if taken[j : j + m].any():
                continue
            picked.append(j)
            taken[j : j + m] = True
        if len(picked) >= min_repeats:
            claimed = taken
            groups.append(picked)
            t += m
        else:
            t += 1
    return groups


def _motif_regions(
    space: MetricSpace, sequence, m: int, r: int, cap: float
) -> list[frozenset]:
    regions = []
    claimed: set = set()
    for group in find_motif_occurrences(space, sequence, m, r, cap):
        for j in group:
            ids = frozenset(sequence[j : j + m])
            if ids & claimed:
                continue
            if _set_diameter(space, ids) <= cap:
                regions.append(ids)
                claimed |= ids
    return regions


def _fiber_regions(
    space: MetricSpace, sequence, n_bins: int, cap: float
) -> list[frozenset]:
    from .errors import CondensaError
    from .separator import _fiber_index, urysohn_separator

    first, last = sequence[0], sequence[-1]
    if first == last:
        return []
    try:
        f = urysohn_separator(space, {first}, {last})
    except CondensaError:
        return []
    by_bin: dict[int, set] = {}
    for pid in space.point_ids:
        by_bin.setdefault(_fiber_index(f.values[pid], n_bins), set()).add(pid)
    regions = []
    for _, members in sorted(by_bin.items()):
        if len(members) >= 2 and _set_diameter(space, members) <= cap:
            regions.append(frozenset(members))
    return regions


def find_regions(policy: CondensationPolicy, space: MetricSpace, sequence) -> list[frozenset]:
    cap = policy.internal_diameter_cap
    if policy.kind == "window":
        return _window_regions(space, sequence, policy.window_w, cap)
    if policy.kind == "motif":
        return _motif_regions(
            space, sequence, policy.motif_len, policy.motif_min_repeats, cap
        )
    return _fiber_regions(space, sequence, policy.n_bins, cap)


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

def _monotone_cover(space, epsilon: float, prev: CoverResult, partition: Partition) -> CoverResult:
    """Cover a quotient level, falling back to the image of the parent's
    cover if the fresh greedy run comes out larger. Center images always
    cover the quotient (distances only shrink), so the covering numbers
    stay nonincreasing even when greedy is unlucky."""
    fresh = cover_auto(space, epsilon)
    if fresh.n <= prev.n:
        return fresh
    mapped: list = []
    for c in prev.centers:
        img = partition.class_of[c]
        if img not in mapped:
            mapped.append(img)
    try:
        prev_lower = prev.n - prev.optimality_gap
        return CoverResult(
            epsilon=epsilon,
            n=len(mapped),
            centers=tuple(mapped),
            method="greedy",
            optimality_gap=max(0, len(mapped) - prev_lower),
            space=space,
        )
    except ValueError:
        return fresh


def build_hierarchy(
    stream: Stream,
    policy: CondensationPolicy,
    epsilon: float,
    budget: int,
    max_depth: int = 32,
) -> Hierarchy:
    """Condense a stream until its covering number fits the budget.

    Stopping precedence: budget reached, then max_depth, then no eligible
    region (verdict INCOMPRESSIBLE, hierarchy returned as built).
    """
    space0 = stream.spatial_space()
    levels: list[MetricSpace] = [space0]
    maps: list[Partition] = []
    tokens: list[Token] = []
    sequences: list[tuple] = [tuple(space0.point_ids)]
    provenances: list[dict] = [
        {pid: ((i, i),) for i, pid in enumerate(space0.point_ids)}
    ]
    covers: list[CoverResult] = [cover_auto(space0, epsilon)]

    while True:
        if covers[-1].n <= budget:
            verdict = VERDICT_BUDGET
            break
        if len(maps) >= max_depth:
            verdict = VERDICT_MAX_DEPTH
            break
        space_k = levels[-1]
        regions = find_regions(policy, space_k, sequences[-1])
        if not regions:
            verdict = VERDICT_INCOMPRESSIBLE
            break

        level_no = len(maps) + 1
        part = Partition.from_regions(space_k, regions)
        q = build_quotient(space_k, part, level=level_no)

        prev_prov = provenances[-1]
        new_prov: dict = {}
        region_members = set().union(*regions)
        for qid, members in q.partition.classes.items():
            ivs = [iv for mpid in members for iv in prev_prov[mpid]]
            new_prov[qid] = merge_intervals(ivs)
            if len(members) >= 2 or (members & region_members):
                tokens.append(
                    Token(
                        class_id=qid,
                        level=level_no,
                        members=frozenset(members),
                        provenance=new_prov[qid],
                    )
                )

        new_seq: list = []
        for pid in sequences[-1]:
            qid = q.partition.class_of[pid]
            if not new_seq or new_seq[-1] != qid:
                new_seq.append(qid)

        levels.append(q.space)
        maps.append(q.partition)
        sequences.append(tuple(new_seq))
        provenances.append(new_prov)
        covers.append(_monotone_cover(q.space, epsilon, covers[-1], q.partition))

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
        verdict=verdict,
        sequences=sequences,
        provenances=provenances,
    )


def depth_vs_length_experiment(
    l_values: Sequence[int],
    policy: CondensationPolicy,
    epsilon: float | Callable[[Stream], float],
    budget: int,
    rho_target: float,
    stream_factory: Callable[[int], Stream],
    max_depth: int = 32,
) -> list[tuple[int, int, int, int]]:
    """Achieved depth versus stream length, next to the depth formula.

    For each L the factory builds a stream with the same recurring
    structure, the engine condenses it to the budget, and the row records
    (L, N0, D_achieved, D_formula). epsilon may be a callable deriving the
    resolution from the stream (e.g. from its minimum sample spacing).
    """
    rows = []
    for length in l_values:
        stream = stream_factory(int(length))
        eps = epsilon(stream) if callable(epsilon) else float(epsilon)
        h = build_hierarchy(stream, policy, eps, budget, max_depth=max_depth)
        n0 = h.n_per_level[0]
        rows.append((int(length), n0, h.depth, required_depth(n0, budget, rho_target)))
    return rows
