import math

import numpy as np
import pytest

from condensa.cover import (
    covering_number_exact,
    covering_number_greedy,
    segment_capacity_curve,
)
from condensa.errors import (
    AsymmetricDistance,
    EmptySpace,
    InvalidEpsilon,
    MatrixFormatError,
    NegativeDistance,
    NonzeroDiagonal,
    TooLargeForExact,
    TriangleViolation,
)
from condensa.rng import XorShift64Star
from condensa.spaces import SegmentSpace, diameter, validate_metric

from helpers import exhaustive_cover_number, interval_cover_number, random_point_space


def unit_simplex(n):
    return validate_metric(np.ones((n, n)) - np.eye(n))


class TestValidateMetric:
    def test_singleton(self):
        sp = validate_metric([[0.0]])
        assert sp.n == 1
        assert diameter(sp) == 0.0

    def test_two_point(self):
        sp = validate_metric([[0, 1], [1, 0]])
        assert sp.n == 2
        assert sp.distance(0, 1) == 1.0

    def test_asymmetric(self):
        with pytest.raises(AsymmetricDistance) as exc:
            validate_metric([[0, 1], [2, 0]])
        assert (exc.value.i, exc.value.j) == (0, 1)

    def test_negative(self):
        with pytest.raises(NegativeDistance):
            validate_metric([[0, -1], [-1, 0]])

    def test_nonzero_diagonal(self):
        with pytest.raises(NonzeroDiagonal) as exc:
            validate_metric([[0, 1], [1, 0.5]])
        assert exc.value.i == 1

    def test_triangle_violation(self):
        with pytest.raises(TriangleViolation):
            validate_metric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])

    def test_triangle_tolerance_accepts_rounding(self):
        # Violation far below 1e-9 relative must pass.
        m = np.array([[0, 1, 2 + 1e-13], [1, 0, 1], [2 + 1e-13, 1, 0]])
        validate_metric(m)

    def test_not_square(self):
        with pytest.raises(MatrixFormatError):
            validate_metric([[0, 1, 2], [1, 0, 1]])

    def test_empty(self):
        with pytest.raises(EmptySpace):
            validate_metric(np.zeros((0, 0)))

    def test_nonfinite(self):
        with pytest.raises(MatrixFormatError):
            validate_metric([[0, math.inf], [math.inf, 0]])

    def test_zero_distance_between_distinct_points_allowed(self):
        # Repeated stream samples produce pseudometrics; they are legal.
        sp = validate_metric([[0, 0], [0, 0]])
        assert sp.distance(0, 1) == 0.0


class TestSegmentSpace:
    def test_sample_count_and_diameter(self):
        seg = SegmentSpace(10, 0.1)
        assert seg.n == 101
        assert diameter(seg) == pytest.approx(10.0)

    def test_translation_invariance_exact(self):
        seg = SegmentSpace(5, 0.1)
        for k in (1, 7, 13):
            assert seg.distance(0, 20) == seg.distance(k, 20 + k)

    def test_resolution_guard(self):
        seg = SegmentSpace(10, 0.5)
        with pytest.raises(InvalidEpsilon):
            covering_number_exact(seg, 1.0, n_exact_max=seg.n)


class TestExactCover:
    def test_unit_simplex_small_eps(self):
        assert covering_number_exact(unit_simplex(5), 0.5).n == 5

    def test_unit_simplex_eps_one(self):
        assert covering_number_exact(unit_simplex(5), 1.0).n == 1

    def test_segment_l10(self):
        seg = SegmentSpace(10, 0.1)
        res = covering_number_exact(seg, 1.0, n_exact_max=seg.n)
        assert res.n == 5
        assert res.method == "exact"
        assert res.optimality_gap == 0
        # Independent oracle: optimal 1-D interval sweep.
        assert interval_cover_number(10, 0.1, 1.0) == 5

    def test_matches_exhaustive_oracle(self):
        rng = XorShift64Star(42)
        for _ in range(12):
            sp = random_point_space(rng, 7)
            eps = 0.15 + 0.3 * rng.random()
            assert covering_number_exact(sp, eps).n == exhaustive_cover_number(sp, eps)

    def test_size_cap(self):
        with pytest.raises(TooLargeForExact):
            covering_number_exact(unit_simplex(30), 0.5)

    def test_invalid_epsilon(self):
        with pytest.raises(InvalidEpsilon):
            covering_number_exact(unit_simplex(3), 0.0)
        with pytest.raises(InvalidEpsilon):
            covering_number_greedy(unit_simplex(3), -1.0)

    def test_monotone_in_epsilon(self):
        rng = XorShift64Star(7)
        sp = random_point_space(rng, 10)
        eps_grid = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
        ns = [covering_number_exact(sp, e).n for e in eps_grid]
        assert all(b <= a for a, b in zip(ns, ns[1:]))


class TestGreedyCover:
    def test_first_ball_covers_everything(self):
        assert covering_number_greedy(unit_simplex(5), 1.0).n == 1

    def test_eps_at_least_diameter(self):
        rng = XorShift64Star(3)
        sp = random_point_space(rng, 9)
        assert covering_number_greedy(sp, diameter(sp)).n == 1

    def test_segment_within_exact_band(self):
        seg = SegmentSpace(10, 0.1)
        greedy = covering_number_greedy(seg, 1.0).n
        assert 5 <= greedy <= 7

    def test_never_below_exact_and_ln_bound(self):
        rng = XorShift64Star(9)
        for _ in range(10):
            sp = random_point_space(rng, 9)
            eps = 0.1 + 0.4 * rng.random()
            g = covering_number_greedy(sp, eps).n
            e = covering_number_exact(sp, eps).n
            assert g >= e
            assert g <= (1 + math.log(sp.n)) * e

    def test_tie_breaks_lowest_index(self):
        # Two symmetric clusters: both candidate centers cover 2 points,
        # the lower index must win the first pick.
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 0.0], [5.1, 0.0]])
        diff = pts[:, None, :] - pts[None, :, :]
        sp = validate_metric(np.sqrt((diff**2).sum(axis=2)))
        res = covering_number_greedy(sp, 0.2)
        assert res.centers[0] == "0"

    def test_cover_validity_direct_scan(self):
        rng = XorShift64Star(21)
        sp = random_point_space(rng, 15)
        res = covering_number_greedy(sp, 0.3)
        cidx = [sp.index_of(c) for c in res.centers]
        for i in range(sp.n):
            assert min(sp.distance(i, c) for c in cidx) <= 0.3


class TestCapacityCurve:
    def test_reference_values(self):
        rows = segment_capacity_curve([2, 4, 8], 1.0, 0.1)
        assert [n for _, n in rows] == [1, 2, 4]
        ns = [n for _, n in rows]
        assert all(b > a for a, b in zip(ns, ns[1:]))

    def test_one_ball_covers_2eps_segment(self):
        rows = segment_capacity_curve([2.0], 1.0, 0.1)
        assert rows[0][1] == 1

    def test_doubling_bound(self):
        rows = dict(segment_capacity_curve([2, 4, 8, 16], 1.0, 0.1))
        for length in (2, 4, 8):
            assert rows[2 * length] <= 2 * (rows[length] + 1)

    def test_band_around_linear_law(self):
        for length, n in segment_capacity_curve([2, 4, 6, 8, 10], 1.0, 0.1):
            assert abs(n - math.ceil(length / 2.0)) <= 1

    def test_resolution_precondition(self):
        with pytest.raises(InvalidEpsilon):
            segment_capacity_curve([4.0], 1.0, 0.3)


class TestCoverResultSerialization:
    def test_csv_row(self):
        res = covering_number_exact(unit_simplex(3), 1.0)
        row = res.to_csv_row()
        assert row[0] == "1.0"
        assert row[1] == "1"
        assert row[2] == "exact"
        assert row[3] == "0"
        assert ";" not in row[4] or len(res.centers) > 1
