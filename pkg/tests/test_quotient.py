import numpy as np
import pytest

from condensa.cover import covering_number_exact
from condensa.errors import EmptyRegion, PartitionMismatch, UnknownPoint
from condensa.quotient import (
    Partition,
    build_quotient,
    contract_region,
    merge_intervals,
    quotient_distance_oracle,
)
from condensa.rng import XorShift64Star
from condensa.spaces import SegmentSpace, validate_metric

from helpers import random_closure_space, random_partition, random_point_space


@pytest.fixture
def shortcut_space():
    # d(p1,p2)=5, d(z,p1)=2, d(z,p2)=7
    m = np.array([[0.0, 5.0, 2.0], [5.0, 0.0, 7.0], [2.0, 7.0, 0.0]])
    return validate_metric(m, point_ids=["p1", "p2", "z"])


class TestPartition:
    def test_mutual_consistency(self, shortcut_space):
        part = Partition(shortcut_space, {"U": {"p1", "p2"}, "Z": {"z"}})
        assert part.class_of["p1"] == "U"
        assert part.classes["Z"] == frozenset({"z"})

    def test_rejects_overlap(self, shortcut_space):
        with pytest.raises(PartitionMismatch):
            Partition(shortcut_space, {"a": {"p1", "p2"}, "b": {"p2", "z"}})

    def test_rejects_missing_points(self, shortcut_space):
        with pytest.raises(PartitionMismatch):
            Partition(shortcut_space, {"a": {"p1"}})

    def test_rejects_unknown_point(self, shortcut_space):
        with pytest.raises(UnknownPoint):
            Partition(shortcut_space, {"a": {"p1", "p2", "z", "ghost"}})


class TestBuildQuotient:
    def test_identity_partition_is_isometric(self, shortcut_space):
        q = build_quotient(shortcut_space, Partition.singletons(shortcut_space))
        assert q.space.n == 3
        assert np.allclose(q.space.dist, shortcut_space.dist, atol=1e-12)

    def test_total_collapse(self, shortcut_space):
        part = Partition(shortcut_space, {"all": {"p1", "p2", "z"}})
        q = build_quotient(shortcut_space, part)
        assert q.space.n == 1
        assert q.space.diameter() == 0.0

    def test_shortcut_distance(self, shortcut_space):
        part = Partition(shortcut_space, {"U": {"p1", "p2"}, "Z": {"z"}})
        q = build_quotient(shortcut_space, part)
        u, z = q.partition.class_of["p1"], q.partition.class_of["z"]
        assert q.space.distance(q.space.index_of(u), q.space.index_of(z)) == 2.0

    def test_token_ids_are_deterministic(self, shortcut_space):
        part = Partition(shortcut_space, {"U": {"p1", "p2"}, "Z": {"z"}})
        q = build_quotient(shortcut_space, part, level=3)
        assert q.space.point_ids == ("L3_C0", "L3_C1")

    def test_zero_distance_classes_merge(self):
        # Two duplicated positions: classes {a,b} and {c,d} sit at distance 0.
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        diff = pts[:, None, :] - pts[None, :, :]
        sp = validate_metric(np.sqrt((diff**2).sum(axis=2)), point_ids=list("abcd"))
        part = Partition(sp, {"x": {"a", "b"}, "y": {"c", "d"}})
        q = build_quotient(sp, part)
        assert q.space.n == 1
        assert q.partition.classes[q.space.point_ids[0]] == frozenset("abcd")

    def test_partition_of_other_space_rejected(self, shortcut_space):
        other = validate_metric([[0, 1], [1, 0]], point_ids=["x", "y"])
        with pytest.raises(PartitionMismatch):
            build_quotient(shortcut_space, Partition.singletons(other))


class TestContractRegion:
    def test_single_point_region_is_isometric(self, shortcut_space):
        q, token = contract_region(shortcut_space, {"z"})
        assert q.space.n == 3
        assert token.member_count() == 1

    def test_segment_endpoints_halve_diameter(self):
        seg = SegmentSpace(10, 0.1)
        q, token = contract_region(seg, {"0", "100"}, stream_provenance=[(0, 0), (100, 100)])
        assert q.space.diameter() == pytest.approx(5.0, abs=1e-9)
        assert token.provenance == ((0, 0), (100, 100))

    def test_whole_space_collapse(self, shortcut_space):
        q, _ = contract_region(shortcut_space, {"p1", "p2", "z"})
        assert q.space.diameter() == 0.0

    def test_empty_region(self, shortcut_space):
        with pytest.raises(EmptyRegion):
            contract_region(shortcut_space, set())

    def test_unknown_point(self, shortcut_space):
        with pytest.raises(UnknownPoint):
            contract_region(shortcut_space, {"ghost"})


class TestOracleAgreement:
    def test_same_class_is_zero(self, shortcut_space):
        part = Partition(shortcut_space, {"U": {"p1", "p2"}, "Z": {"z"}})
        assert quotient_distance_oracle(shortcut_space, part, "p1", "p2") == 0.0

    def test_singleton_partition_gives_parent_distance(self, shortcut_space):
        part = Partition.singletons(shortcut_space)
        assert quotient_distance_oracle(shortcut_space, part, "p1", "z") == 2.0

    def test_three_point_example(self, shortcut_space):
        part = Partition(shortcut_space, {"U": {"p1", "p2"}, "Z": {"z"}})
        assert quotient_distance_oracle(shortcut_space, part, "z", "p1") == 2.0

    def test_random_spaces_agree(self):
        rng = XorShift64Star(1234)
        for trial in range(20):
            sp = (random_point_space if trial % 2 else random_closure_space)(rng, 8)
            part = random_partition(rng, sp, 3)
            q = build_quotient(sp, part)
            tol = 1e-9 * max(sp.diameter(), 1.0)
            for a in sp.point_ids:
                for b in sp.point_ids:
                    ca, cb = q.partition.class_of[a], q.partition.class_of[b]
                    built = q.space.distance(q.space.index_of(ca), q.space.index_of(cb))
                    oracle = quotient_distance_oracle(sp, part, a, b)
                    assert abs(built - oracle) <= tol


class TestQuotientProperties:
    def test_non_expansive(self):
        rng = XorShift64Star(5)
        for _ in range(8):
            sp = random_closure_space(rng, 9)
            part = random_partition(rng, sp, 4)
            q = build_quotient(sp, part)
            for i, a in enumerate(sp.point_ids):
                for j, b in enumerate(sp.point_ids):
                    ca, cb = q.partition.class_of[a], q.partition.class_of[b]
                    dq = q.space.distance(q.space.index_of(ca), q.space.index_of(cb))
                    assert dq <= sp.distance(i, j) + 1e-12

    def test_quotient_never_exceeds_min_member_distance(self):
        rng = XorShift64Star(6)
        sp = random_point_space(rng, 10)
        part = random_partition(rng, sp, 4)
        q = build_quotient(sp, part)
        for ca, ma in part.classes.items():
            for cb, mb in part.classes.items():
                if ca == cb:
                    continue
                dmin = min(
                    sp.distance(sp.index_of(a), sp.index_of(b)) for a in ma for b in mb
                )
                qa = q.partition.class_of[next(iter(ma))]
                qb = q.partition.class_of[next(iter(mb))]
                dq = q.space.distance(q.space.index_of(qa), q.space.index_of(qb))
                assert dq <= dmin + 1e-12

    def test_diameter_never_grows(self):
        rng = XorShift64Star(77)
        for _ in range(10):
            sp = random_point_space(rng, 11)
            part = random_partition(rng, sp, 1 + rng.randint(5))
            q = build_quotient(sp, part)
            assert q.space.diameter() <= sp.diameter() + 1e-12

    def test_quotient_is_valid_metric(self):
        rng = XorShift64Star(13)
        sp = random_closure_space(rng, 10)
        part = random_partition(rng, sp, 3)
        q = build_quotient(sp, part)
        validate_metric(q.space.dist)  # axioms hold after collapse

    def test_composition_equals_join(self):
        rng = XorShift64Star(99)
        for _ in range(6):
            sp = random_point_space(rng, 9)
            p1 = random_partition(rng, sp, 4)
            q1 = build_quotient(sp, p1)
            p2 = random_partition(rng, q1.space, 2)
            q2 = build_quotient(q1.space, p2, level=2)
            joined = q1.partition.compose(p2)
            qj = build_quotient(sp, joined, level=2)
            tol = 1e-9 * max(sp.diameter(), 1.0)
            assert qj.space.n == q2.space.n
            assert np.allclose(qj.space.dist, q2.space.dist, atol=tol)

    def test_covering_number_never_grows(self):
        rng = XorShift64Star(31)
        for _ in range(5):
            sp = random_point_space(rng, 10)
            part = random_partition(rng, sp, 4)
            q = build_quotient(sp, part)
            for eps in (0.1, 0.25, 0.5, 1.0):
                assert (
                    covering_number_exact(q.space, eps).n
                    <= covering_number_exact(sp, eps).n
                )


def test_merge_intervals():
    assert merge_intervals([(5, 6), (0, 2), (3, 4)]) == ((0, 6),)
    assert merge_intervals([(0, 1), (4, 9)]) == ((0, 1), (4, 9))
