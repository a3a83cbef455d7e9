"""Experiment runners behind the CLI.

Each runner generates its data, executes the relevant library operations,
asserts that experiment's invariants (raising ExperimentFailed on the
first violation), and writes CSV tables, optional SVG figures, and a
content-hash manifest into the output directory.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .bench import CSV_HEADER_SCALING, cost_scaling_report
from .config import ExperimentConfig
from .cover import segment_capacity_curve
from .errors import ExperimentFailed
from .fileio import write_csv, write_manifest
from .generators import gen_motif_stream, gen_spiral, linear_probe_accuracy
from .hierarchy import (
    CSV_HEADER_DEPTH,
    CSV_HEADER_HIERARCHY,
    CondensationPolicy,
    Hierarchy,
    Stream,
    build_hierarchy,
    depth_vs_length_experiment,
)
from .parity import (
    CSV_HEADER_PARITY,
    ParityState,
    TaskSpec,
    conflicting_tasks,
    cross_interference_audit,
    forgetting_experiment,
    random_spd,
)
from .rng import XorShift64Star
from .separator import (
    CSV_HEADER_SEPARATION_REPORT,
    CSV_HEADER_SEPARATOR,
    build_fiber_tower,
    classify_threshold,
    fiber_quotient,
    recursive_separation_check,
    urysohn_separator,
)

CSV_HEADER_CAPACITY = ["L", "N"]
CSV_HEADER_TOKENS = [
    "token_id",
    "level",
    "member_count",
    "provenance_start",
    "provenance_end",
]


def _require(condition: bool, what: str) -> None:
    if not condition:
        raise ExperimentFailed(what)


def min_position_spacing(coords: np.ndarray) -> float:
    """Smallest positive pairwise distance among the given points."""
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    positive = d[d > 0]
    if positive.size == 0:
        raise ExperimentFailed("all points coincide; no resolvable spacing")
    return float(positive.min())


def motif_epsilon(stream: Stream, motif_len: int) -> float:
    """Resolution that separates the motif's positions but spans the jitter
    cloud of repeated occurrences: just under half the minimum spacing of
    the first motif window."""
    return 0.45 * min_position_spacing(stream.coords[:motif_len])


def stream_epsilon(stream: Stream) -> float:
    """Resolution below half the minimum sample spacing: every distinct
    position then demands its own ball."""
    return 0.45 * min_position_spacing(stream.coords)


def motif_delta(stream: Stream, motif_len: int, jitter: float) -> float:
    """Diameter cap admitting jittered occurrences of the leading window."""
    window = stream.coords[:motif_len]
    diff = window[:, None, :] - window[None, :, :]
    diam = float(np.sqrt((diff**2).sum(axis=2)).max())
    return diam * 1.1 + 10.0 * jitter


def _write_token_log(path: Path, hierarchy: Hierarchy) -> None:
    rows = []
    for tok in hierarchy.tokens:
        if tok.provenance:
            for start, end in tok.provenance:
                rows.append([tok.class_id, tok.level, tok.member_count(), start, end])
        else:
            rows.append([tok.class_id, tok.level, tok.member_count(), "", ""])
    write_csv(path, CSV_HEADER_TOKENS, rows)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _run_capacity(cfg: ExperimentConfig, out: Path) -> list[str]:
    eps = 1.0 if cfg.epsilon == "auto" else float(cfg.epsilon)
    rows = segment_capacity_curve(cfg.l_values, eps, cfg.h)
    for length, n in rows:
        expected = math.ceil(length / (2 * eps))
        _require(
            abs(n - expected) <= 1,
            f"covering number {n} strays from ceil(L/2eps)={expected} at L={length}",
        )
    write_csv(out / "capacity_curve.csv", CSV_HEADER_CAPACITY, [[repr(l), n] for l, n in rows])
    files = ["capacity_curve.csv"]
    if cfg.emit_svg:
        from .plots import plot_capacity_curve

        plot_capacity_curve(rows, eps, out / "capacity_curve.svg")
        files.append("capacity_curve.svg")
    return files


def _run_collapse(cfg: ExperimentConfig, out: Path) -> list[str]:
    ds = gen_spiral(cfg.n_per_class, cfg.turns, cfg.noise_sigma, cfg.seed)
    is_b = np.array([lab == "B" for lab in ds.labels])
    accuracy = linear_probe_accuracy(ds.coords, is_b, seed=cfg.seed)

    f = urysohn_separator(ds.space, ds.a_ids, ds.b_ids)
    q, _, f_bar = fiber_quotient(ds.space, f, cfg.n_bins)
    a_img = {q.image_of(a) for a in ds.a_ids}
    b_img = {q.image_of(b) for b in ds.b_ids}
    _require(a_img.isdisjoint(b_img), "A and B images collide in the quotient")
    _require(
        all(f_bar.values[c] == 0.0 for c in a_img)
        and all(f_bar.values[c] == 1.0 for c in b_img),
        "descended separator is not exactly 0/1 on the class images",
    )
    correct = sum(
        1
        for pid, lab in zip(ds.space.point_ids, ds.labels)
        if classify_threshold(f_bar, q.image_of(pid)) == (f"{lab}_side")
    )
    _require(correct == ds.space.n, "threshold rule misclassified a collapsed point")

    eps = 0.25 if cfg.epsilon == "auto" else float(cfg.epsilon)
    tower = build_fiber_tower(ds.space, ds.a_ids, ds.b_ids, cfg.tower_bins, eps)
    report = recursive_separation_check(tower, ds.a_ids, ds.b_ids)
    _require(report.passed, "separation check failed at some level")

    sep_rows = [
        [pid, repr(f.values[pid]), "A" if pid in ds.a_ids else "B" if pid in ds.b_ids else "-"]
        for pid in ds.space.point_ids
    ]
    write_csv(out / "separator.csv", CSV_HEADER_SEPARATOR, sep_rows)
    write_csv(
        out / "separation_report.csv",
        CSV_HEADER_SEPARATION_REPORT,
        [r.to_csv_row() for r in report.rows],
    )
    write_csv(out / "hierarchy_report.csv", CSV_HEADER_HIERARCHY, tower.report_rows())
    files = ["separator.csv", "separation_report.csv", "hierarchy_report.csv"]
    if cfg.emit_svg:
        from .plots import plot_separation_levels, plot_spiral

        plot_spiral(ds, accuracy, out / "spiral.svg")
        plot_separation_levels(report.rows, out / "separation_levels.svg")
        files += ["spiral.svg", "separation_levels.svg"]
    return files


def _run_parity(cfg: ExperimentConfig, out: Path) -> list[str]:
    if cfg.tasks:
        dim_flow = max(cfg.dim_flow, 1 + max(c for coords, _ in cfg.tasks for c in coords))
        tasks = [
            TaskSpec(f"task{i}", coords, np.array(target), cfg.steps_per_task)
            for i, (coords, target) in enumerate(cfg.tasks)
        ]
        builtin_conflict = False
    else:
        dim_flow = cfg.dim_flow
        tasks = conflicting_tasks(dim_flow, steps=cfg.steps_per_task)
        builtin_conflict = True
    dim_scaffold = len(tasks) * dim_flow
    if cfg.metric == "random_spd":
        rng = XorShift64Star(cfg.seed)
        g_f = random_spd(dim_flow, rng)
        g_s = random_spd(dim_scaffold, rng)
    else:
        g_f = np.eye(dim_flow)
        g_s = np.eye(dim_scaffold)

    parity_res = forgetting_experiment(
        tasks, "parity", seed=cfg.seed, lr=cfg.lr, flow_len=cfg.flow_len,
        scaffold_len=cfg.scaffold_len, g_f=g_f, g_s=g_s, dim_flow=dim_flow,
    )
    mono_res = forgetting_experiment(
        tasks, "monolithic", seed=cfg.seed, lr=cfg.lr, flow_len=cfg.flow_len,
        scaffold_len=cfg.scaffold_len, g_f=g_f, g_s=g_s,
        monolithic_cross=cfg.monolithic_cross, dim_flow=dim_flow,
    )

    state = ParityState(
        theta_f=parity_res.final_flow,
        theta_s=parity_res.final_scaffold,
        g_f=g_f,
        g_s=g_s,
    )
    audit = cross_interference_audit(parity_res.updates, state)
    _require(audit.passed and not audit.vacuous, "cross-interference audit not exactly zero")
    _require(
        parity_res.scaffold_flow_drift_max == 0.0,
        "memory functional moved during a flow phase",
    )
    _require(
        parity_res.slot_drift_after_task[-1] == 0.0,
        "task-0 scaffold slot drifted after later tasks",
    )
    if builtin_conflict:
        inflation = mono_res.task0_loss_after_task[-1] / max(
            mono_res.task0_loss_after_task[0], 1e-300
        )
        _require(inflation >= 2.0, f"monolithic task-0 inflation {inflation:.3g} below 2x")

    write_csv(
        out / "parity_metrics.csv", CSV_HEADER_PARITY, [r.to_csv_row() for r in parity_res.rows]
    )
    write_csv(
        out / "monolithic_metrics.csv",
        CSV_HEADER_PARITY,
        [r.to_csv_row() for r in mono_res.rows],
    )
    files = ["parity_metrics.csv", "monolithic_metrics.csv"]
    if cfg.emit_svg:
        from .plots import plot_parity_losses

        plot_parity_losses(parity_res.rows, mono_res.rows, out / "parity_losses.svg")
        files.append("parity_losses.svg")
    return files


def _scaling_policy_and_eps(cfg: ExperimentConfig):
    def factory(n: int) -> Stream:
        repeats = max(1, round(n / cfg.motif_len))
        return gen_motif_stream(cfg.motif_len, repeats, cfg.jitter, cfg.seed)

    probe = factory(int(cfg.sample_counts[0]))
    delta = (
        motif_delta(probe, cfg.motif_len, cfg.jitter)
        if cfg.delta == "auto"
        else float(cfg.delta)
    )
    policy = CondensationPolicy(
        kind="motif",
        internal_diameter_cap=delta,
        motif_len=cfg.motif_len,
        motif_min_repeats=cfg.motif_min_repeats,
    )

    if cfg.epsilon == "auto":
        eps = lambda stream: motif_epsilon(stream, cfg.motif_len)  # noqa: E731
    else:
        eps = float(cfg.epsilon)
    return factory, policy, eps


def _run_scaling(cfg: ExperimentConfig, out: Path) -> list[str]:
    factory, policy, eps = _scaling_policy_and_eps(cfg)
    counts = [int(c) for c in cfg.sample_counts]
    rows = cost_scaling_report(counts, policy, eps, cfg.budget, factory)
    for row in rows:
        _require(
            row[3] <= cfg.budget,
            f"fast navigation needed {row[3]} candidates per step at L={row[0]}",
        )
    slow = [row[1] for row in rows]
    _require(
        all(b > a for a, b in zip(slow, slow[1:])),
        "slow verification cost did not grow with stream length",
    )
    write_csv(out / "cost_scaling.csv", CSV_HEADER_SCALING, rows)
    files = ["cost_scaling.csv"]
    if cfg.emit_svg:
        from .plots import plot_cost_scaling

        plot_cost_scaling(rows, out / "cost_scaling.svg")
        files.append("cost_scaling.svg")
    return files


def _run_depth(cfg: ExperimentConfig, out: Path) -> list[str]:
    def factory(n: int) -> Stream:
        repeats = max(1, round(n / cfg.motif_len))
        return gen_motif_stream(
            cfg.motif_len, repeats, 0.0, cfg.seed, drift=cfg.drift, scale=0.5
        )

    probe = factory(int(cfg.l_values[0]))
    delta = probe.max_hop() * 1.01 if cfg.delta == "auto" else float(cfg.delta)
    policy = CondensationPolicy(
        kind=cfg.policy_kind,
        internal_diameter_cap=delta,
        window_w=cfg.window_w,
        motif_len=cfg.motif_len,
    )
    eps = stream_epsilon if cfg.epsilon == "auto" else float(cfg.epsilon)

    lengths = [int(v) for v in cfg.l_values]
    rows = depth_vs_length_experiment(lengths, policy, eps, cfg.budget, cfg.rho, factory)
    depths = [r[2] for r in rows]
    _require(
        all(b >= a for a, b in zip(depths, depths[1:])),
        "achieved depth decreased as streams lengthened",
    )
    write_csv(out / "depth_vs_length.csv", CSV_HEADER_DEPTH, rows)

    # Full report for the longest stream: per-level capacity and tokens.
    stream = factory(lengths[-1])
    h = build_hierarchy(
        stream, policy, eps(stream) if callable(eps) else eps, cfg.budget
    )
    write_csv(out / "hierarchy_report.csv", CSV_HEADER_HIERARCHY, h.report_rows())
    _write_token_log(out / "token_log.csv", h)
    files = ["depth_vs_length.csv", "hierarchy_report.csv", "token_log.csv"]
    if cfg.emit_svg:
        from .plots import plot_depth_scaling

        plot_depth_scaling(rows, out / "depth_scaling.svg")
        files.append("depth_scaling.svg")
    return files


_RUNNERS = {
    "capacity": _run_capacity,
    "collapse": _run_collapse,
    "parity": _run_parity,
    "scaling": _run_scaling,
    "depth": _run_depth,
}


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """Dispatch one experiment; returns every file written (manifest last).

    Raises ExperimentFailed when a module-level assertion does not hold,
    ConfigError for bad configuration, OSError for I/O trouble.
    """
    out = Path(cfg.output_dir) if cfg.output_dir else Path("condensa_out")
    out.mkdir(parents=True, exist_ok=True)
    files = _RUNNERS[cfg.experiment](cfg, out)
    manifest = write_manifest(out, files)
    return [out / name for name in files] + [manifest]
