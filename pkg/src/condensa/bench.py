"""Cost accounting for slow search versus fast navigation.

slow_verify answers reachability on the flat stream geometry by
depth-bounded recursive bisection with no memoization, so it re-explores
midpoints and its distance-evaluation count grows with history length.

fast_navigate answers the same kind of query on a condensation hierarchy:
at every step it evaluates the distance-to-goal objective only on the
eps-cover centers of the current active region, so its per-step cost is
bounded by the region's covering number regardless of stream length. Both
sides report pure operation counts; wall clock never enters an assertion.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cover import CoverResult, cover_auto
from .errors import BudgetExceeded, DepthExhausted, NoPath
from .hierarchy import CondensationPolicy, Hierarchy, Stream, build_hierarchy
from .spaces import MetricSpace

CSV_HEADER_SCALING = [
    "L",
    "slow_dist_evals",
    "fast_steps",
    "fast_cand_per_step_max",
    "depth",
]


@dataclass
class CostLedger:
    """Monotone operation counters for one benchmark run."""

    distance_evaluations: int = 0
    candidate_evaluations: int = 0
    recursion_depth_max: int = 0
    wall_notes: str = ""
    step_candidates: list = field(default_factory=list)

    def count_distance(self) -> None:
        self.distance_evaluations += 1

    def note_depth(self, depth: int) -> None:
        self.recursion_depth_max = max(self.recursion_depth_max, depth)

    def count_step(self, n_candidates: int) -> None:
        self.candidate_evaluations += n_candidates
        self.step_candidates.append(n_candidates)

    @property
    def max_per_step(self) -> int:
        return max(self.step_candidates) if self.step_candidates else 0

    @property
    def n_steps(self) -> int:
        return len(self.step_candidates)


@dataclass(frozen=True)
class ActiveRegion:
    """The states one navigation step must discriminate among, with its
    eps-cover. Centers come from the region itself and cover it."""

    level: int
    members: tuple
    epsilon: float
    cover: CoverResult

    def __post_init__(self):
        member_set = set(self.members)
        for c in self.cover.centers:
            if c not in member_set:
                raise ValueError(f"cover center {c!r} outside the active region")


# ---------------------------------------------------------------------------
# Slow side: recursive reachability without memoization
# ---------------------------------------------------------------------------

def slow_verify(
    stream_space: MetricSpace,
    start,
    goal,
    hop_radius: float,
    ledger: CostLedger,
    max_depth: int | None = None,
) -> bool:
    """REACH(a, b, k): true when d(a, b) <= hop_radius, else when some
    midpoint m strictly between a and b in stream order satisfies
    REACH(a, m, k-1) and REACH(m, b, k-1). Midpoints are tried median
    index first. No memoization: every distance lookup is paid again.

    With max_depth unset, the depth defaults to ceil(log2(n)), enough for
    any simple hop path. An explicit max_depth that is too shallow for an
    otherwise reachable goal raises DepthExhausted.
    """
    ia = stream_space.index_of(start)
    ib = stream_space.index_of(goal)
    n = stream_space.n
    user_capped = max_depth is not None
    depth = max_depth if user_capped else max(0, math.ceil(math.log2(max(n - 1, 1))))

    def reach(a: int, b: int, k: int, at: int) -> bool:
        ledger.count_distance()
        ledger.note_depth(at)
        if stream_space.distance(a, b) <= hop_radius:
            return True
        if k == 0:
            return False
        lo, hi = (a, b) if a < b else (b, a)
        mids = sorted(range(lo + 1, hi), key=lambda m: (abs(m - (lo + hi) / 2), m))
        for m in mids:
            if reach(a, m, k - 1, at + 1) and reach(m, b, k - 1, at + 1):
                return True
        return False

    ok = reach(ia, ib, depth, 0)
    if not ok and user_capped:
        needed = _hop_count(stream_space, ia, ib, hop_radius)
        if needed is not None and needed > 2**depth:
            raise DepthExhausted(depth, needed)
    return ok


def _hop_count(space: MetricSpace, ia: int, ib: int, hop_radius: float) -> int | None:
    """Fewest hops of length <= hop_radius from ia to ib (BFS; not billed
    to any ledger, used only to diagnose DepthExhausted)."""
    if ia == ib:
        return 0
    seen = {ia: 0}
    queue = deque([ia])
    idx = np.arange(space.n)
    while queue:
        u = queue.popleft()
        row = space.distance_block(np.array([u]), idx)[0]
        for v in np.nonzero(row <= hop_radius)[0]:
            v = int(v)
            if v not in seen:
                seen[v] = seen[u] + 1
                if v == ib:
                    return seen[v]
                queue.append(v)
    return None


# ---------------------------------------------------------------------------
# Fast side: navigation over the condensed hierarchy
# ---------------------------------------------------------------------------

def _lineage(h: Hierarchy, point_id) -> list:
    h.levels[0].index_of(point_id)  # raises UnknownPoint for foreign ids
    images = [point_id]
    for part in h.maps:
        images.append(part.class_of[images[-1]])
    return images


def _region_step(
    h: Hierarchy,
    level: int,
    member_ids: Sequence,
    objective_target,
    ledger: CostLedger,
    budget: int | None,
):
    """Evaluate distance-to-target on the eps-cover centers of a region.

    Returns (best_center_id, best_objective). Billing: one candidate
    evaluation per center; the hard per-step bound is the cover size.
    """
    space = h.levels[level]
    member_idx = sorted(space.index_of(p) for p in member_ids)
    sub = space.subspace(member_idx)
    cov = cover_auto(sub, h.epsilon)
    region = ActiveRegion(
        level=level,
        members=tuple(space.point_ids[i] for i in member_idx),
        epsilon=h.epsilon,
        cover=cov,
    )
    if budget is not None and cov.n > budget:
        raise BudgetExceeded(
            f"active region at level {level} needs {cov.n} candidates, budget {budget}"
        )
    target_i = space.index_of(objective_target)
    best_id, best_obj = None, math.inf
    for c in region.cover.centers:
        obj = space.distance(space.index_of(c), target_i)
        if obj < best_obj:
            best_id, best_obj = c, obj
    ledger.count_step(cov.n)
    return best_id, best_obj


def fast_navigate(
    h: Hierarchy,
    query_start,
    query_goal,
    ledger: CostLedger,
    budget: int | None = None,
) -> list:
    """Greedy navigation from start to goal through the hierarchy.

    If the two lineages meet inside one token, the path is that single
    token (one localization step inside it pays the region's cover size).
    Otherwise routing runs at the top level: each step evaluates the
    objective on the eps-cover of the ball around the current token and
    must strictly improve the distance to the goal's top-level image, or
    NoPath is raised. When the goal's image lies within eps, the step
    evaluates the goal alone.
    """
    s_img = _lineage(h, query_start)
    g_img = _lineage(h, query_goal)
    depth = h.depth
    eps = h.epsilon

    # Lowest shared token: the whole route lives inside one class.
    for k in range(1, depth + 1):
        if s_img[k] == g_img[k]:
            token = s_img[k]
            members = h.maps[k - 1].classes[token]
            _region_step(h, k - 1, members, g_img[k - 1], ledger, budget)
            return [token]

    top = h.levels[depth]
    goal_top = g_img[depth]
    current = s_img[depth]
    path = [current]
    goal_i = top.index_of(goal_top)
    visited = {current}
    for _ in range(top.n + 1):
        if current == goal_top:
            return path
        cur_i = top.index_of(current)
        d_goal = top.distance(cur_i, goal_i)
        if d_goal <= eps:
            ledger.count_step(1)  # the goal itself is the only candidate
            if budget is not None and budget < 1:
                raise BudgetExceeded("budget below 1 candidate")
            current = goal_top
            path.append(current)
            continue
        # Active region: states not yet visited within one resolution step
        # of the current token.
        row = top.row(cur_i)
        members = [
            top.point_ids[j]
            for j in np.nonzero(row <= eps)[0]
            if top.point_ids[j] not in visited
        ]
        if not members:
            raise NoPath(f"stalled at {current!r}: every state within eps visited")
        best_id, _ = _region_step(h, depth, members, goal_top, ledger, budget)
        current = best_id
        visited.add(current)
        path.append(current)
    raise NoPath("step guard exceeded without reaching the goal token")


# ---------------------------------------------------------------------------
# Comparative scaling
# ---------------------------------------------------------------------------

def cost_scaling_report(
    l_values: Sequence[int],
    policy: CondensationPolicy,
    epsilon: float | Callable[[Stream], float],
    budget: int,
    stream_factory: Callable[[int], Stream],
    hop_margin: float = 1.01,
) -> list[tuple[int, int, int, int, int]]:
    """(L, slow_dist_evals, fast_steps, fast_cand_per_step_max, depth) per
    stream length.

    Slow runs recursive reachability end to end on the stream's temporal
    (arc-length) geometry with hop radius just above the largest sample
    step. Fast condenses the stream and navigates end to end.
    """
    rows = []
    for length in l_values:
        stream = stream_factory(int(length))
        eps = epsilon(stream) if callable(epsilon) else float(epsilon)
        h = build_hierarchy(stream, policy, eps, budget)

        slow_ledger = CostLedger()
        temporal = stream.temporal_space()
        first, last = temporal.point_ids[0], temporal.point_ids[-1]
        slow_verify(temporal, first, last, stream.max_hop() * hop_margin, slow_ledger)

        fast_ledger = CostLedger()
        fast_navigate(h, first, last, fast_ledger)

        rows.append(
            (
                int(length),
                slow_ledger.distance_evaluations,
                fast_ledger.n_steps,
                fast_ledger.max_per_step,
                h.depth,
            )
        )
    return rows
