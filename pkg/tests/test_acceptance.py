"""Acceptance suite: one test per criterion, each printing a PASS line with
its runtime. Every tolerance is pinned here; run with -s to see the lines.
"""

import math
import time

import numpy as np
import pytest

from condensa.bench import CostLedger, fast_navigate, slow_verify
from condensa.cover import (
    covering_number_exact,
    covering_number_greedy,
    segment_capacity_curve,
)
from condensa.errors import IncompatiblePartition
from condensa.generators import (
    gen_motif_stream,
    gen_noise_stream,
    gen_spiral,
    linear_probe_accuracy,
)
from condensa.hierarchy import (
    VERDICT_INCOMPRESSIBLE,
    CondensationPolicy,
    build_hierarchy,
    depth_vs_length_experiment,
    required_depth,
    verify_telescoping,
)
from condensa.parity import (
    ParityState,
    PhaseUpdate,
    MemoryFunctional,
    apply_phase,
    conflicting_tasks,
    cross_interference_audit,
    forgetting_experiment,
    random_spd,
)
from condensa.quotient import Partition, build_quotient, quotient_distance_oracle
from condensa.rng import XorShift64Star
from condensa.separator import (
    build_fiber_tower,
    classify_threshold,
    fiber_quotient,
    recursive_separation_check,
    urysohn_separator,
)

from helpers import random_partition, random_point_space


class Timer:
    def __init__(self, limit_s):
        self.limit = limit_s

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False


def report(criterion, timer, detail=""):
    print(f"PASS {criterion} ({timer.elapsed:.2f}s < {timer.limit}s) {detail}")
    assert timer.elapsed < timer.limit, f"{criterion} exceeded {timer.limit}s"


def least_squares_slope(xs, ys):
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum(
        (x - mx) ** 2 for x in xs
    )


def test_criterion_1_linear_capacity_growth():
    with Timer(10) as t:
        rows = segment_capacity_curve([2, 4, 6, 8, 10], 1.0, 0.1)
        for length, n in rows:
            assert abs(n - math.ceil(length / 2)) <= 1
        slope = least_squares_slope([r[0] for r in rows], [r[1] for r in rows])
        assert 0.4 <= slope <= 0.6
    report("criterion 1 (linear capacity growth)", t, f"slope={slope:.3f}")


def halving_hierarchy():
    stream = gen_motif_stream(8, 32, 0.0, seed=11)
    window = stream.coords[:8]
    diff = window[:, None, :] - window[None, :, :]
    dmat = np.sqrt((diff**2).sum(axis=2))
    eps = 0.45 * float(dmat[dmat > 0].min())
    policy = CondensationPolicy(
        kind="window", internal_diameter_cap=stream.max_hop() * 1.01, window_w=2
    )
    return stream, build_hierarchy(stream, policy, eps, budget=1)


def test_criterion_2_telescoping_and_depth():
    with Timer(30) as t:
        _, h = halving_hierarchy()
        rep = verify_telescoping(h, 2.0)
        assert rep.passed and rep.first_violation is None
        n0, nd, depth = h.n_per_level[0], h.n_per_level[-1], h.depth
        assert nd * 2**depth <= n0  # exact integer arithmetic
        assert depth <= required_depth(n0, 1, 2.0) + 1
    report(
        "criterion 2 (telescoping + depth)",
        t,
        f"N={h.n_per_level} D={depth} formula={required_depth(n0, 1, 2.0)}",
    )


def test_criterion_3_depth_scaling():
    with Timer(60) as t:
        def factory(n):
            return gen_motif_stream(
                8, max(1, round(n / 8)), 0.0, seed=11, drift=1.5, scale=0.5
            )

        def eps(stream):
            d = stream.coords[:, None, :] - stream.coords[None, :, :]
            dist = np.sqrt((d**2).sum(axis=2))
            return 0.45 * float(dist[dist > 0].min())

        policy = CondensationPolicy(
            kind="window",
            internal_diameter_cap=factory(64).max_hop() * 1.01,
            window_w=2,
        )
        rows = depth_vs_length_experiment(
            [64, 128, 256, 512], policy, eps, 7, 2.0, factory
        )
        depths = [r[2] for r in rows]
        assert all(b >= a for a, b in zip(depths, depths[1:]))
        assert all(b - a <= 2 for a, b in zip(depths, depths[1:]))
        slope = least_squares_slope([math.log2(r[0]) for r in rows], depths)
        assert 0.5 <= slope <= 2.0
    report("criterion 3 (depth scaling)", t, f"D={depths} slope={slope:.2f}")


def test_criterion_4_collapse_separability():
    with Timer(20) as t:
        ds = gen_spiral(100, 4.0, 0.05, 7)
        is_b = np.array([lab == "B" for lab in ds.labels])
        acc = linear_probe_accuracy(ds.coords, is_b, 10_000, seed=7)
        assert acc <= 0.65

        f = urysohn_separator(ds.space, ds.a_ids, ds.b_ids)
        q, _, f_bar = fiber_quotient(ds.space, f, 16)
        a_img = {q.image_of(a) for a in ds.a_ids}
        b_img = {q.image_of(b) for b in ds.b_ids}
        assert len(a_img) == 1 and len(b_img) == 1 and a_img != b_img
        assert f_bar.values[next(iter(a_img))] == 0.0
        assert f_bar.values[next(iter(b_img))] == 1.0
        correct = sum(
            1
            for pid, lab in zip(ds.space.point_ids, ds.labels)
            if classify_threshold(f_bar, q.image_of(pid)) == f"{lab}_side"
        )
        assert correct == 200
    report("criterion 4 (collapse separability)", t, f"probe={acc:.3f} acc=1.0")


def test_criterion_5_recursive_descent():
    with Timer(10) as t:
        ds = gen_spiral(100, 4.0, 0.05, 7)
        tower = build_fiber_tower(
            ds.space, ds.a_ids, ds.b_ids, (16, 8, 4, 2, 2), 0.25
        )
        rep = recursive_separation_check(tower, ds.a_ids, ds.b_ids)
        assert rep.passed and len(rep.rows) == 6
        for row in rep.rows:
            assert row.disjoint and row.f_a == 0.0 and row.f_b == 1.0

        sabotage = Partition(
            tower.levels[2], {"bad": set(tower.levels[2].point_ids)}
        )
        tower.maps[2] = sabotage
        with pytest.raises(IncompatiblePartition) as exc:
            recursive_separation_check(tower, ds.a_ids, ds.b_ids)
        assert exc.value.level == 2
    report("criterion 5 (recursive descent)", t, "5-level tower + level-2 injection")


def test_criterion_6_parity_stability():
    with Timer(10) as t:
        for seed in (101, 202, 303):
            rng = XorShift64Star(seed)
            g_f, g_s = random_spd(5, rng), random_spd(7, rng)
            state = ParityState(
                theta_f=np.zeros(5), theta_s=np.zeros(7), g_f=g_f, g_s=g_s
            )
            mem = MemoryFunctional(anchors=(np.zeros(7),))
            log = []
            r_reference = mem.value(state.theta_s)
            step = 0
            while step < 1000:
                for _ in range(10):
                    if step >= 1000:
                        break
                    upd = PhaseUpdate.flow(
                        [rng.uniform(-1, 1) for _ in range(5)], 7, step
                    )
                    state = apply_phase(state, upd)
                    log.append(upd)
                    assert mem.value(state.theta_s) == r_reference  # bit-identical
                    step += 1
                if step >= 1000:
                    break
                upd = PhaseUpdate.scaffold(
                    [rng.uniform(-1, 1) for _ in range(7)], 5, step
                )
                state = apply_phase(state, upd)
                log.append(upd)
                r_reference = mem.value(state.theta_s)
                step += 1
            audit = cross_interference_audit(log, state)
            assert audit.max_abs_cross == 0.0 and not audit.vacuous

        tasks = conflicting_tasks(6)
        parity = forgetting_experiment(tasks, "parity", seed=3)
        mono = forgetting_experiment(tasks, "monolithic", seed=3, monolithic_cross=0.4)
        assert parity.scaffold_flow_drift_max == 0.0
        assert parity.slot_drift_after_task[-1] == 0.0
        inflation = mono.task0_loss_after_task[1] / mono.task0_loss_after_task[0]
        assert inflation >= 2.0
    report("criterion 6 (parity stability)", t, f"inflation={inflation:.2e}")


def test_criterion_7_constant_time_navigation():
    with Timer(120) as t:
        def factory(n):
            return gen_motif_stream(10, max(1, round(n / 10)), 0.002, seed=5)

        probe = factory(100)
        window = probe.coords[:10]
        diff = window[:, None, :] - window[None, :, :]
        dmat = np.sqrt((diff**2).sum(axis=2))
        delta = float(dmat.max()) * 1.1 + 0.02
        policy = CondensationPolicy(
            kind="motif", internal_diameter_cap=delta, motif_len=10, motif_min_repeats=2
        )

        slow_counts = []
        fast_max = []
        for n in (100, 1000, 10_000):
            stream = factory(n)
            eps = 0.45 * float(dmat[dmat > 0].min())
            h = build_hierarchy(stream, policy, eps, budget=7)
            assert h.n_per_level[-1] <= 7

            led_slow = CostLedger()
            assert slow_verify(
                stream.temporal_space(),
                "0",
                str(stream.n - 1),
                stream.max_hop() * 1.01,
                led_slow,
            )
            slow_counts.append(led_slow.distance_evaluations)

            led_fast = CostLedger()
            fast_navigate(h, "0", str(stream.n - 1), led_fast, budget=7)
            assert led_fast.max_per_step <= 7  # hard per-step candidate bound
            fast_max.append(led_fast.max_per_step)

        assert slow_counts[1] >= 1.8 * slow_counts[0]
        assert slow_counts[2] >= 1.8 * slow_counts[1]
    report(
        "criterion 7 (constant-time navigation)",
        t,
        f"slow={slow_counts} fast_max={fast_max}",
    )


def test_criterion_8_incompressibility_control():
    with Timer(30) as t:
        policy = CondensationPolicy(kind="window", internal_diameter_cap=0.01, window_w=2)
        verdicts = []
        for seed in (1, 2, 3):
            noise = gen_noise_stream(256, seed)
            h = build_hierarchy(noise, policy, 0.05, budget=7)
            verdicts.append(h.verdict)
        assert sum(v == VERDICT_INCOMPRESSIBLE for v in verdicts) >= 2

        n_noise = covering_number_greedy(
            gen_noise_stream(256, 1).spatial_space(), 0.05
        ).n
        n_motif = covering_number_greedy(
            gen_motif_stream(8, 32, 0.0, seed=11).spatial_space(), 0.05
        ).n
        assert n_noise >= 3 * n_motif
    report(
        "criterion 8 (incompressibility control)",
        t,
        f"verdicts={verdicts} N_noise={n_noise} N_motif={n_motif}",
    )


def test_criterion_9_oracle_equivalence():
    with Timer(60) as t:
        rng = XorShift64Star(2024)
        checked_pairs = 0
        for trial in range(50):
            n = 5 + rng.randint(8)  # 5..12 points
            sp = random_point_space(rng, n)
            part = random_partition(rng, sp, 2 + rng.randint(min(3, n - 2)))
            q = build_quotient(sp, part)
            tol = 1e-9 * max(sp.diameter(), 1.0)
            ids = sp.point_ids
            for a in ids:
                for b in ids:
                    ca, cb = q.partition.class_of[a], q.partition.class_of[b]
                    built = q.space.distance(q.space.index_of(ca), q.space.index_of(cb))
                    oracle = quotient_distance_oracle(sp, part, a, b)
                    assert abs(built - oracle) <= tol
                    checked_pairs += 1

            eps = 0.1 + 0.5 * rng.random()
            g = covering_number_greedy(sp, eps).n
            e = covering_number_exact(sp, eps).n
            assert e <= g <= (1 + math.log(n)) * e
    report("criterion 9 (oracle equivalence)", t, f"pairs={checked_pairs}")
