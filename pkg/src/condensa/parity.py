"""Parity-partitioned parameter updates with a block-diagonal metric.

Parameters split into a flow block (receives learning updates) and a
scaffold block (stores consolidated memory). Updates carry a phase and an
exact zero delta on the opposite block, and the metric has no cross
entries by construction, so the inner product between any flow update and
any scaffold update is exactly zero, with no tolerance. A memory
functional that reads only the scaffold is therefore bit-invariant under
flow phases.

The monolithic baseline runs the same natural-gradient steps on the
concatenated vector under a dense SPD metric; a dense metric mixes the
blocks, which is exactly the leakage the partition removes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    ExperimentFailed,
    NotPositiveDefinite,
    PhaseViolation,
)
from .rng import XorShift64Star

FLOW = "flow"
SCAFFOLD = "scaffold"

CSV_HEADER_PARITY = [
    "step",
    "phase",
    "task_id",
    "task0_loss",
    "current_loss",
    "R_value",
    "R_drift",
]

DIVERGENCE_LIMIT = 1e6


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    a.flags.writeable = False
    return a


def _check_spd(g: np.ndarray, name: str) -> None:
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {g.shape}")
    if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(g).max()))):
        raise NotPositiveDefinite(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"{name} failed Cholesky factorization") from None


@dataclass(frozen=True)
class ParityState:
    """Flow/scaffold parameter blocks with their SPD metric blocks. The
    full metric is block-diagonal by construction: cross entries do not
    exist in the representation. cross_coupling is a leakage knob kept at
    exactly 0; nonzero leakage is outside the stability guarantee and is
    not modelled."""

    theta_f: np.ndarray
    theta_s: np.ndarray
    g_f: np.ndarray
    g_s: np.ndarray
    cross_coupling: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta_f", _frozen(self.theta_f))
        object.__setattr__(self, "theta_s", _frozen(self.theta_s))
        object.__setattr__(self, "g_f", _frozen(self.g_f))
        object.__setattr__(self, "g_s", _frozen(self.g_s))
        _check_spd(self.g_f, "g_f")
        _check_spd(self.g_s, "g_s")
        if self.g_f.shape[0] != self.theta_f.size:
            raise DimensionMismatch("g_f does not match theta_f")
        if self.g_s.shape[0] != self.theta_s.size:
            raise DimensionMismatch("g_s does not match theta_s")
        if self.cross_coupling != 0.0:
            raise ValueError(
                "cross_coupling must stay 0.0: leakage is outside the guarantee"
            )

    @classmethod
    def zeros(cls, dim_flow: int, dim_scaffold: int, g_f=None, g_s=None) -> "ParityState":
        return cls(
            theta_f=np.zeros(dim_flow),
            theta_s=np.zeros(dim_scaffold),
            g_f=np.eye(dim_flow) if g_f is None else g_f,
            g_s=np.eye(dim_scaffold) if g_s is None else g_s,
        )


@dataclass(frozen=True)
class PhaseUpdate:
    """One phase-tagged update. The opposite block's delta must be exactly
    the zero vector; any nonzero entry, however small, is a violation."""

    phase: str
    delta_f: np.ndarray
    delta_s: np.ndarray
    step_id: int

    def __post_init__(self):
        if self.phase not in (FLOW, SCAFFOLD):
            raise PhaseViolation(f"unknown phase {self.phase!r}")
        object.__setattr__(self, "delta_f", _frozen(self.delta_f))
        object.__setattr__(self, "delta_s", _frozen(self.delta_s))
        frozen_block = self.delta_s if self.phase == FLOW else self.delta_f
        if np.any(frozen_block != 0.0):
            raise PhaseViolation(
                f"{self.phase} update carries a nonzero delta in its frozen block"
            )

    @classmethod
    def flow(cls, delta_f, dim_scaffold: int, step_id: int) -> "PhaseUpdate":
        return cls(FLOW, np.asarray(delta_f, dtype=np.float64), np.zeros(dim_scaffold), step_id)

    @classmethod
    def scaffold(cls, delta_s, dim_flow: int, step_id: int) -> "PhaseUpdate":
        return cls(SCAFFOLD, np.zeros(dim_flow), np.asarray(delta_s, dtype=np.float64), step_id)


def inner_product_g(state: ParityState, u: PhaseUpdate, v: PhaseUpdate) -> float:
    """u_f' g_f v_f + u_s' g_s v_s. Opposite-phase pairs have disjoint
    supports, so the result is exactly 0.0 for them."""
    for upd in (u, v):
        if upd.delta_f.size != state.theta_f.size or upd.delta_s.size != state.theta_s.size:
            raise DimensionMismatch("update does not match state blocks")
    return float(
        u.delta_f @ state.g_f @ v.delta_f + u.delta_s @ state.g_s @ v.delta_s
    )


def apply_phase(state: ParityState, upd: PhaseUpdate) -> ParityState:
    """New state with the phase's block updated; the other block is the
    same stored array object, hence bit-identical."""
    if upd.delta_f.size != state.theta_f.size or upd.delta_s.size != state.theta_s.size:
        raise DimensionMismatch("update does not match state blocks")
    if upd.phase == FLOW:
        return ParityState(
            theta_f=state.theta_f + upd.delta_f,
            theta_s=state.theta_s,
            g_f=state.g_f,
            g_s=state.g_s,
        )
    return ParityState(
        theta_f=state.theta_f,
        theta_s=state.theta_s + upd.delta_s,
        g_f=state.g_f,
        g_s=state.g_s,
    )


@dataclass(frozen=True)
class MemoryFunctional:
    """R(theta_s) = sum over anchors of squared distance to theta_s.
    Reads the scaffold block only."""

    anchors: tuple

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(_frozen(a) for a in self.anchors))

    def value(self, theta_s: np.ndarray) -> float:
        return float(sum(np.dot(theta_s - a, theta_s - a) for a in self.anchors))

    def grad(self, theta_s: np.ndarray) -> np.ndarray:
        g = np.zeros_like(theta_s)
        for a in self.anchors:
            g += 2.0 * (theta_s - a)
        return g


@dataclass(frozen=True)
class InterferenceReport:
    max_abs_cross: float
    n_pairs: int
    vacuous: bool
    passed: bool


def cross_interference_audit(log: Sequence[PhaseUpdate], state: ParityState) -> InterferenceReport:
    """Inner product of every opposite-phase pair in the log; passes only
    if the maximum absolute value is exactly 0 (or the pair set is empty,
    which is flagged as vacuous)."""
    flows = [u for u in log if u.phase == FLOW]
    scaffolds = [u for u in log if u.phase == SCAFFOLD]
    worst = 0.0
    n_pairs = 0
    for u in flows:
        for v in scaffolds:
            worst = max(worst, abs(inner_product_g(state, u, v)))
            n_pairs += 1
    vacuous = n_pairs == 0
    return InterferenceReport(
        max_abs_cross=worst, n_pairs=n_pairs, vacuous=vacuous, passed=worst == 0.0
    )


def random_spd(dim: int, rng: XorShift64Star, scale: float = 1.0) -> np.ndarray:
    """Well-conditioned random SPD matrix, exactly symmetric by construction."""
    a = np.array([[rng.uniform(-1.0, 1.0) for _ in range(dim)] for _ in range(dim)])
    m = (a + a.T) * 0.5 * scale
    m = m + np.eye(dim) * (2.0 * dim * scale)
    return m


# ---------------------------------------------------------------------------
# Two-task forgetting demonstration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaskSpec:
    """Least-squares objective 0.5 * ||theta[coords] - target||^2 over a
    designated coordinate set of the flow block."""

    name: str
    coords: tuple
    target: np.ndarray
    steps: int = 60

    def __post_init__(self):
        object.__setattr__(self, "target", _frozen(self.target))
        if len(self.coords) != self.target.size:
            raise DimensionMismatch("coords and target length differ")

    def loss(self, theta_f: np.ndarray) -> float:
        r = theta_f[list(self.coords)] - self.target
        return 0.5 * float(np.dot(r, r))

    def grad(self, theta_f: np.ndarray) -> np.ndarray:
        g = np.zeros_like(theta_f)
        g[list(self.coords)] = theta_f[list(self.coords)] - self.target
        return g


def conflicting_tasks(dim_flow: int, magnitude: float = 1.0, steps: int = 60) -> list[TaskSpec]:
    """Two tasks with opposing optima on the same coordinates."""
    coords = tuple(range(dim_flow))
    target = np.full(dim_flow, magnitude)
    return [
        TaskSpec("task0", coords, target, steps),
        TaskSpec("task1", coords, -target, steps),
    ]


def disjoint_tasks(dim_flow: int, magnitude: float = 1.0, steps: int = 60) -> list[TaskSpec]:
    """Two tasks on disjoint halves of the flow block."""
    half = dim_flow // 2
    return [
        TaskSpec("task0", tuple(range(half)), np.full(half, magnitude), steps),
        TaskSpec("task1", tuple(range(half, dim_flow)), np.full(dim_flow - half, -magnitude), steps),
    ]


@dataclass(frozen=True)
class MetricsRow:
    step: int
    phase: str
    task_id: int
    task0_loss: float
    current_loss: float
    r_value: float
    r_drift: float

    def to_csv_row(self) -> list[str]:
        return [
            str(self.step),
            self.phase,
            str(self.task_id),
            repr(self.task0_loss),
            repr(self.current_loss),
            repr(self.r_value),
            repr(self.r_drift),
        ]


@dataclass
class ForgettingResult:
    mode: str
    rows: list
    task0_loss_after_task: list  # task-0 loss right after finishing each task
    slot_drift_after_task: list  # |task-0 scaffold slot - its consolidated value|
    scaffold_flow_drift_max: float  # max |R change| observed across flow steps
    final_flow: np.ndarray
    final_scaffold: np.ndarray
    updates: list  # PhaseUpdate log (parity mode only)


def _consolidation_value(window: list[np.ndarray]) -> np.ndarray:
    # Token embedding for a validated flow segment: the mean of the
    # window's parameter iterates.
    return np.mean(np.stack(window), axis=0)


def forgetting_experiment(
    tasks: Sequence[TaskSpec],
    mode: str,
    seed: int = 0,
    lr: float = 0.2,
    flow_len: int = 10,
    scaffold_len: int = 1,
    g_f: np.ndarray | None = None,
    g_s: np.ndarray | None = None,
    monolithic_cross: float = 0.0,
    dim_flow: int | None = None,
) -> ForgettingResult:
    """Sequential task training under parity gating or a monolithic metric.

    parity: natural-gradient steps confined to the flow block, with the
    finished task's flow mean consolidated into its scaffold slot during a
    scaffold phase. monolithic: the same step rule on the concatenated
    vector; monolithic_cross scales a cross block wired into the dense
    metric, through which flow gradients leak into the scaffold region.

    Scaffold slots are dim_flow wide, one per task, so the scaffold must
    hold len(tasks) * dim_flow entries.
    """
    if mode not in ("parity", "monolithic"):
        raise ValueError(f"unknown mode {mode!r}")
    if not tasks or len(tasks) < 1:
        raise ValueError("need at least one task")
    if dim_flow is None:
        dim_flow = 1 + max(max(t.coords) for t in tasks)
    n_tasks = len(tasks)
    dim_scaffold = n_tasks * dim_flow
    g_f = np.eye(dim_flow) if g_f is None else np.asarray(g_f, dtype=np.float64)
    g_s = np.eye(dim_scaffold) if g_s is None else np.asarray(g_s, dtype=np.float64)

    rows: list[MetricsRow] = []
    updates: list[PhaseUpdate] = []
    memory = MemoryFunctional(anchors=(np.zeros(dim_scaffold),))

    task0 = tasks[0]
    step = 0
    task0_loss_after: list[float] = []
    slot_drift_after: list[float] = []
    flow_drift_max = 0.0
    consolidated0: np.ndarray | None = None

    def slot(k: int) -> slice:
        return slice(k * dim_flow, (k + 1) * dim_flow)

    if mode == "parity":
        state = ParityState(
            theta_f=np.zeros(dim_flow), theta_s=np.zeros(dim_scaffold), g_f=g_f, g_s=g_s
        )
        prev_r = memory.value(state.theta_s)
        for k, task in enumerate(tasks):
            window: list[np.ndarray] = []
            done = 0
            while done < task.steps:
                burst = min(flow_len, task.steps - done)
                for _ in range(burst):
                    grad = task.grad(state.theta_f)
                    delta = -lr * np.linalg.solve(state.g_f, grad)
                    upd = PhaseUpdate.flow(delta, dim_scaffold, step)
                    r_before = memory.value(state.theta_s)
                    state = apply_phase(state, upd)
                    updates.append(upd)
                    r_now = memory.value(state.theta_s)
                    flow_drift_max = max(flow_drift_max, abs(r_now - r_before))
                    window.append(state.theta_f)
                    window = window[-flow_len:]
                    cur = task.loss(state.theta_f)
                    _check_divergence(cur)
                    rows.append(
                        MetricsRow(step, FLOW, k, task0.loss(state.theta_f), cur,
                                   r_now, r_now - prev_r)
                    )
                    prev_r = r_now
                    step += 1
                done += burst
                for _ in range(scaffold_len):
                    token = _consolidation_value(window)
                    delta_s = np.zeros(dim_scaffold)
                    delta_s[slot(k)] = token - state.theta_s[slot(k)]
                    upd = PhaseUpdate.scaffold(delta_s, dim_flow, step)
                    state = apply_phase(state, upd)
                    updates.append(upd)
                    r_now = memory.value(state.theta_s)
                    rows.append(
                        MetricsRow(step, SCAFFOLD, k, task0.loss(state.theta_f),
                                   task.loss(state.theta_f), r_now, r_now - prev_r)
                    )
                    prev_r = r_now
                    step += 1
            if k == 0:
                consolidated0 = state.theta_s[slot(0)].copy()
            task0_loss_after.append(task0.loss(state.theta_f))
            slot_drift_after.append(
                float(np.abs(state.theta_s[slot(0)] - consolidated0).max())
            )
        return ForgettingResult(
            mode, rows, task0_loss_after, slot_drift_after, flow_drift_max,
            state.theta_f.copy(), state.theta_s.copy(), updates,
        )

    # Monolithic: one concatenated vector under a dense SPD metric.
    dim = dim_flow + dim_scaffold
    g_full = np.zeros((dim, dim))
    g_full[:dim_flow, :dim_flow] = g_f
    g_full[dim_flow:, dim_flow:] = g_s
    if monolithic_cross != 0.0:
        if not 0.0 < monolithic_cross < 1.0:
            raise ValueError("monolithic_cross must lie in [0, 1)")
        rng = XorShift64Star(seed)
        cross = np.array(
            [[rng.uniform(-1.0, 1.0) for _ in range(dim_scaffold)] for _ in range(dim_flow)]
        )
        # Scale the cross block below the spectral slack of the diagonal
        # blocks so the dense metric stays positive definite.
        lam_min = min(
            float(np.linalg.eigvalsh(g_f)[0]), float(np.linalg.eigvalsh(g_s)[0])
        )
        spectral = float(np.linalg.norm(cross, ord=2))
        scale = monolithic_cross * lam_min / spectral
        g_full[:dim_flow, dim_flow:] = scale * cross
        g_full[dim_flow:, :dim_flow] = scale * cross.T
    _check_spd(g_full, "monolithic metric")

    theta = np.zeros(dim)
    prev_r = memory.value(theta[dim_flow:])
    for k, task in enumerate(tasks):
        window = []
        done = 0
        while done < task.steps:
            burst = min(flow_len, task.steps - done)
            for _ in range(burst):
                grad = np.zeros(dim)
                grad[:dim_flow] = task.grad(theta[:dim_flow])
                theta = theta - lr * np.linalg.solve(g_full, grad)
                window.append(theta[:dim_flow].copy())
                window = window[-flow_len:]
                r_now = memory.value(theta[dim_flow:])
                cur = task.loss(theta[:dim_flow])
                _check_divergence(cur)
                rows.append(
                    MetricsRow(step, FLOW, k, task0.loss(theta[:dim_flow]), cur,
                               r_now, r_now - prev_r)
                )
                prev_r = r_now
                step += 1
            done += burst
            for _ in range(scaffold_len):
                token = _consolidation_value(window)
                theta = theta.copy()
                theta[dim_flow:][slot(k)] = token
                r_now = memory.value(theta[dim_flow:])
                rows.append(
                    MetricsRow(step, SCAFFOLD, k, task0.loss(theta[:dim_flow]),
                               task.loss(theta[:dim_flow]), r_now, r_now - prev_r)
                )
                prev_r = r_now
                step += 1
        if k == 0:
            consolidated0 = theta[dim_flow:][slot(0)].copy()
        task0_loss_after.append(task0.loss(theta[:dim_flow]))
        slot_drift_after.append(
            float(np.abs(theta[dim_flow:][slot(0)] - consolidated0).max())
        )
    return ForgettingResult(
        mode, rows, task0_loss_after, slot_drift_after, flow_drift_max,
        theta[:dim_flow].copy(), theta[dim_flow:].copy(), [],
    )


def _check_divergence(loss: float) -> None:
    if not np.isfinite(loss) or loss > DIVERGENCE_LIMIT:
        raise ExperimentFailed(f"task loss diverged: {loss!r}")
