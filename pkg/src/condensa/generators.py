"""Synthetic datasets and streams.

All generators draw from the pinned xorshift64* stream (see rng.py), so a
fixed seed reproduces coordinates bit-exactly on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hierarchy import Stream
from .rng import XorShift64Star
from .spaces import EuclideanSpace

# Radial growth rate of the spiral arms: r = 0.1 * phi.
SPIRAL_RADIAL_RATE = 0.1


@dataclass(frozen=True)
class SpiralDataset:
    """Two interleaved spiral arms. Class A follows r = 0.1 phi; class B is
    its point reflection. Labels are balanced by construction."""

    n_per_class: int
    turns: float
    noise_sigma: float
    seed: int
    coords: np.ndarray  # (2 n_per_class, 2); A points first
    labels: tuple  # "A" / "B" per row
    space: EuclideanSpace
    a_ids: tuple
    b_ids: tuple


def gen_spiral(n_per_class: int, turns: float, noise_sigma: float, seed: int) -> SpiralDataset:
    if n_per_class < 2:
        raise ValueError("need at least 2 points per class")
    rng = XorShift64Star(seed)
    phi_max = 2.0 * math.pi * turns
    phis = [i * phi_max / (n_per_class - 1) for i in range(n_per_class)]

    a_pts = []
    for phi in phis:
        r = SPIRAL_RADIAL_RATE * phi
        a_pts.append(
            (
                r * math.cos(phi) + noise_sigma * rng.normal(),
                r * math.sin(phi) + noise_sigma * rng.normal(),
            )
        )
    b_pts = []
    for phi in phis:
        r = SPIRAL_RADIAL_RATE * phi
        b_pts.append(
            (
                -r * math.cos(phi) + noise_sigma * rng.normal(),
                -r * math.sin(phi) + noise_sigma * rng.normal(),
            )
        )

    coords = np.array(a_pts + b_pts, dtype=np.float64)
    a_ids = tuple(f"A{i}" for i in range(n_per_class))
    b_ids = tuple(f"B{i}" for i in range(n_per_class))
    labels = ("A",) * n_per_class + ("B",) * n_per_class
    space = EuclideanSpace(a_ids + b_ids, coords, label=f"spiral seed={seed}")
    return SpiralDataset(
        n_per_class=n_per_class,
        turns=turns,
        noise_sigma=noise_sigma,
        seed=seed,
        coords=coords,
        labels=labels,
        space=space,
        a_ids=a_ids,
        b_ids=b_ids,
    )


def gen_motif_stream(
    motif_len: int,
    n_repeats: int,
    jitter: float,
    seed: int,
    drift: float = 0.0,
    scale: float = 1.0,
) -> Stream:
    """Concatenated jittered copies of one fixed random 2-D motif.

    drift shifts each successive repeat along +x, which keeps the local
    recurring structure while letting the trajectory's spatial extent grow
    with length (the scale-free case the depth experiments need).
    """
    if motif_len < 2:
        raise ValueError("motif_len must be at least 2")
    if n_repeats < 1:
        raise ValueError("n_repeats must be at least 1")
    rng = XorShift64Star(seed)
    motif = [(rng.random() * scale, rng.random() * scale) for _ in range(motif_len)]
    pts = []
    for r in range(n_repeats):
        off = r * drift
        for mx, my in motif:
            pts.append(
                (mx + off + jitter * rng.normal(), my + jitter * rng.normal())
            )
    return Stream(np.array(pts), seed=seed, label=f"motif m={motif_len} r={n_repeats}")


def gen_noise_stream(n: int, seed: int) -> Stream:
    """i.i.d. uniform samples in the unit square: the incompressible control."""
    if n < 2:
        raise ValueError("need at least 2 samples")
    rng = XorShift64Star(seed)
    pts = [(rng.random(), rng.random()) for _ in range(n)]
    return Stream(np.array(pts), seed=seed, label=f"noise n={n}")


def linear_probe_accuracy(
    coords: np.ndarray,
    is_b: np.ndarray,
    n_hyperplanes: int = 10_000,
    seed: int = 0,
) -> float:
    """Best accuracy of any tested linear separator.

    Tests n_hyperplanes random directions plus both axis directions; for
    every direction all thresholds between sorted projections are swept in
    both orientations. Used as the brute-force oracle showing the spirals
    defeat linear cuts.
    """
    rng = XorShift64Star(seed)
    dirs = []
    for _ in range(n_hyperplanes):
        gx, gy = rng.normal(), rng.normal()
        norm = math.hypot(gx, gy) or 1.0
        dirs.append((gx / norm, gy / norm))
    dirs.append((1.0, 0.0))
    dirs.append((0.0, 1.0))
    w = np.array(dirs)  # (m, 2)

    y = np.asarray(is_b, dtype=np.int64)
    n = y.size
    total_b = int(y.sum())
    proj = coords @ w.T  # (n, m)
    order = np.argsort(proj, axis=0, kind="stable")
    y_sorted = y[order]  # (n, m)
    cum_b = np.cumsum(y_sorted, axis=0)
    left_sizes = np.arange(1, n + 1)[:, None]
    # Threshold after sorted position k, predicting left=A / right=B.
    correct = (left_sizes - cum_b) + (total_b - cum_b)
    best = max(
        int(correct.max()),
        int((n - correct).max()),
        total_b,  # empty left side
        n - total_b,
    )
    return best / n
