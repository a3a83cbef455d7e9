"""Independent oracles and random-instance builders shared by the tests.

The oracles here deliberately use different algorithms than the library:
exhaustive subset enumeration for covers, a 1-D interval sweep for
segments, and a raw window scan for compressibility. They are the second
route every dual-checked result is compared against.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from condensa.quotient import Partition
from condensa.rng import XorShift64Star
from condensa.spaces import FiniteMetricSpace, MetricSpace, validate_metric


def exhaustive_cover_number(space: MetricSpace, epsilon: float) -> int:
    """True minimum cover size by enumerating all center subsets."""
    n = space.n
    idx = np.arange(n)
    within = space.distance_block(idx, idx) <= epsilon
    for k in range(1, n + 1):
        for centers in itertools.combinations(range(n), k):
            if np.all(within[list(centers), :].any(axis=0)):
                return k
    raise AssertionError("unreachable: full set always covers")


def interval_cover_number(length: float, h: float, epsilon: float) -> int:
    """Optimal cover of the sampled segment by the classic interval sweep:
    repeatedly center a ball on the farthest sample within epsilon of the
    first uncovered one."""
    n = int(math.floor(length / h + 1e-12)) + 1
    xs = [i * h for i in range(n)]
    count = 0
    i = 0
    while i < n:
        center = xs[i] + epsilon
        best = max(j for j in range(i, n) if xs[j] <= center + 1e-15)
        count += 1
        reach = xs[best] + epsilon
        while i < n and xs[i] <= reach + 1e-15:
            i += 1
    return count


def window_scan_incompressible(coords: np.ndarray, w: int, cap: float) -> bool:
    """Raw scan: no run of w consecutive samples has diameter <= cap."""
    n = coords.shape[0]
    for i in range(n - w + 1):
        win = coords[i : i + w]
        diff = win[:, None, :] - win[None, :, :]
        if float(np.sqrt((diff**2).sum(axis=2)).max()) <= cap:
            return False
    return True


def random_point_space(rng: XorShift64Star, n: int) -> FiniteMetricSpace:
    """Random euclidean point set materialized as a validated matrix."""
    pts = np.array([[rng.random(), rng.random()] for _ in range(n)])
    diff = pts[:, None, :] - pts[None, :, :]
    return validate_metric(np.sqrt((diff**2).sum(axis=2)))


def random_closure_space(rng: XorShift64Star, n: int) -> FiniteMetricSpace:
    """Random symmetric weights repaired into a metric by shortest-path
    closure: non-euclidean instances for the quotient checks."""
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = 0.1 + rng.random()
    for k in range(n):
        m = np.minimum(m, m[:, k, None] + m[None, k, :])
    np.fill_diagonal(m, 0.0)
    return validate_metric(m)


def random_partition(rng: XorShift64Star, space: MetricSpace, n_classes: int) -> Partition:
    ids = list(space.point_ids)
    classes: dict = {f"c{k}": set() for k in range(n_classes)}
    for k in range(n_classes):  # every class nonempty
        classes[f"c{k}"].add(ids[k])
    for pid in ids[n_classes:]:
        classes[f"c{rng.randint(n_classes)}"].add(pid)
    return Partition(space, classes)
