"""Static SVG figures for experiment outputs.

Every figure renders at a fixed 800x600 viewport with fonts converted to
paths, so the files are self-contained line and scatter drawings with no
external assets. The SVG backend maps one inch to 72 points, so the
figure size is 800/72 x 600/72 inches.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.fonttype"] = "path"

FIGSIZE = (800.0 / 72.0, 600.0 / 72.0)
DPI = 72


def _new_axes(title: str, xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def save_svg(fig, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_capacity_curve(rows, epsilon: float, path: Path) -> None:
    ls = [r[0] for r in rows]
    ns = [r[1] for r in rows]
    fig, ax = _new_axes(f"Covering number vs segment length (eps={epsilon})", "L", "N(eps)")
    ax.plot(ls, ns, "o-")
    save_svg(fig, path)


def plot_spiral(dataset, accuracy: float, path: Path) -> None:
    a = dataset.coords[: dataset.n_per_class]
    b = dataset.coords[dataset.n_per_class :]
    fig, ax = _new_axes(
        f"Two-spiral dataset (best linear probe {accuracy:.3f})", "x", "y"
    )
    ax.scatter(a[:, 0], a[:, 1], s=12, c="tab:red", label="class A")
    ax.scatter(b[:, 0], b[:, 1], s=12, c="tab:blue", label="class B")
    ax.legend()
    ax.set_aspect("equal")
    save_svg(fig, path)


def plot_separation_levels(report_rows, path: Path) -> None:
    levels = [r.level for r in report_rows]
    sizes = [r.n_points for r in report_rows]
    fig, ax = _new_axes("Points per level under fiber collapse", "level", "points")
    ax.plot(levels, sizes, "s-")
    ax.set_yscale("log")
    save_svg(fig, path)


def plot_parity_losses(parity_rows, mono_rows, path: Path) -> None:
    fig, ax = _new_axes("Task-0 loss while training sequential tasks", "step", "task-0 loss")
    ax.plot(
        [r.step for r in parity_rows],
        [r.task0_loss for r in parity_rows],
        label="parity (gated blocks)",
    )
    ax.plot(
        [r.step for r in mono_rows],
        [r.task0_loss for r in mono_rows],
        label="monolithic (dense metric)",
    )
    ax.set_yscale("log")
    ax.legend()
    save_svg(fig, path)


def plot_cost_scaling(rows, path: Path) -> None:
    ls = [r[0] for r in rows]
    slow = [r[1] for r in rows]
    fast = [r[3] for r in rows]
    fig, ax = _new_axes("Search vs navigation cost", "stream samples", "operation count")
    ax.plot(ls, slow, "o-", label="slow: recursive verification (total)")
    ax.plot(ls, fast, "s-", label="fast: candidates per step (max)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend()
    save_svg(fig, path)


def plot_depth_scaling(rows, path: Path) -> None:
    ls = [r[0] for r in rows]
    achieved = [r[2] for r in rows]
    formula = [r[3] for r in rows]
    fig, ax = _new_axes("Hierarchy depth vs stream length", "samples (log scale)", "depth")
    ax.plot(ls, achieved, "o-", label="achieved depth")
    ax.plot(ls, formula, "s--", label="depth formula")
    ax.set_xscale("log", base=2)
    ax.legend()
    save_svg(fig, path)
