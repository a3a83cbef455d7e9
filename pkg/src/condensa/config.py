"""Experiment configuration.

Config files are UTF-8 `key = value` lines with `#` comments and no
nesting. Unknown keys are rejected; every numeric knob is validated for
sign. "auto" is accepted where a resolution can be derived from the
generated data (noted per field below).

The parity experiment additionally accepts per-task declarations:

    task0_coords = 0,1,2      # flow-block coordinates the task touches
    task0_target = 1.0,1.0,1.0

Tasks must be numbered 0..k contiguously; coords and target lengths must
match. Without task keys the experiment runs its built-in conflicting
pair.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

EXPERIMENTS = ("capacity", "collapse", "parity", "scaling", "depth")

_TASK_KEY = re.compile(r"^task(\d+)_(target|coords)$")


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 7
    epsilon: float | str = "auto"  # "auto": derive from the generated data
    budget: int = 7
    rho: float = 2.0
    output_dir: Path | None = None
    emit_svg: bool = False
    # condensation policy knobs
    policy_kind: str = "window"
    window_w: int = 2
    motif_len: int = 8
    motif_min_repeats: int = 2
    delta: float | str = "auto"  # internal diameter cap; "auto" as epsilon
    n_bins: int = 16
    # capacity
    l_values: tuple = (2.0, 4.0, 6.0, 8.0, 10.0)
    h: float = 0.1
    # collapse
    n_per_class: int = 100
    turns: float = 4.0
    noise_sigma: float = 0.05
    tower_bins: tuple = (16, 8, 4, 2, 2)
    # parity
    dim_flow: int = 6
    steps_per_task: int = 60
    flow_len: int = 10
    scaffold_len: int = 1
    lr: float = 0.2
    metric: str = "identity"  # identity | random_spd
    cross_coupling: float = 0.0
    monolithic_cross: float = 0.4
    # scaling
    sample_counts: tuple = (100, 1000)
    jitter: float = 0.002
    # depth
    drift: float = 1.5
    # parity task declarations: list of (coords tuple, target tuple)
    tasks: list = field(default_factory=list)


_COMMON = {"experiment", "seed", "epsilon", "budget", "rho", "output_dir", "emit_svg"}
_ALLOWED = {
    "capacity": _COMMON | {"l_values", "h"},
    "collapse": _COMMON | {"n_per_class", "turns", "noise_sigma", "n_bins", "tower_bins"},
    "parity": _COMMON
    | {
        "dim_flow",
        "steps_per_task",
        "flow_len",
        "scaffold_len",
        "lr",
        "metric",
        "cross_coupling",
        "monolithic_cross",
    },
    "scaling": _COMMON
    | {"sample_counts", "motif_len", "motif_min_repeats", "jitter", "delta", "policy_kind"},
    "depth": _COMMON | {"l_values", "motif_len", "drift", "window_w", "delta", "policy_kind"},
}

_DEFAULT_EPSILON = {"capacity": 1.0, "collapse": 0.25, "parity": 1.0}
_DEFAULT_LVALUES = {"depth": (64, 128, 256, 512)}

_POSITIVE_FIELDS = {
    "budget",
    "h",
    "n_per_class",
    "turns",
    "dim_flow",
    "steps_per_task",
    "flow_len",
    "scaffold_len",
    "lr",
    "window_w",
    "motif_len",
    "motif_min_repeats",
    "n_bins",
    "drift",
}
_NONNEGATIVE_FIELDS = {"noise_sigma", "jitter", "cross_coupling", "monolithic_cross"}


def parse_config_text(text: str) -> dict[str, str]:
    """key = value lines; '#' starts a comment; later keys override earlier."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _coerce(name: str, value: str, target_type):
    try:
        if target_type is bool:
            low = value.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        if target_type is int:
            return int(value)
        if target_type is float:
            return float(value)
        if target_type is tuple:
            parts = [p.strip() for p in value.split(",") if p.strip()]
            nums = []
            for p in parts:
                nums.append(float(p) if ("." in p or "e" in p.lower()) else int(p))
            return tuple(nums)
        if target_type is Path:
            return Path(value)
        return value
    except ValueError as exc:
        raise ConfigError(name, str(exc)) from None


_FIELD_TYPES = {
    "experiment": str,
    "seed": int,
    "epsilon": float,
    "budget": int,
    "rho": float,
    "output_dir": Path,
    "emit_svg": bool,
    "policy_kind": str,
    "window_w": int,
    "motif_len": int,
    "motif_min_repeats": int,
    "delta": float,
    "n_bins": int,
    "l_values": tuple,
    "h": float,
    "n_per_class": int,
    "turns": float,
    "noise_sigma": float,
    "tower_bins": tuple,
    "dim_flow": int,
    "steps_per_task": int,
    "flow_len": int,
    "scaffold_len": int,
    "lr": float,
    "metric": str,
    "cross_coupling": float,
    "monolithic_cross": float,
    "sample_counts": tuple,
    "jitter": float,
    "drift": float,
}


def build_config(experiment: str, raw: dict[str, str]) -> ExperimentConfig:
    """Typed, validated config for one experiment. Rejects unknown keys and
    keys that do not belong to the experiment."""
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    allowed = _ALLOWED[experiment]
    cfg = ExperimentConfig(experiment=experiment)
    if experiment in _DEFAULT_EPSILON:
        cfg.epsilon = _DEFAULT_EPSILON[experiment]
    if experiment in _DEFAULT_LVALUES:
        cfg.l_values = _DEFAULT_LVALUES[experiment]

    known = {f.name for f in fields(ExperimentConfig)}
    task_decl: dict[int, dict[str, tuple]] = {}
    for key, value in raw.items():
        m = _TASK_KEY.match(key)
        if m:
            if experiment != "parity":
                raise ConfigError(key, "task declarations belong to the parity experiment")
            task_decl.setdefault(int(m.group(1)), {})[m.group(2)] = _coerce(
                key, value, tuple
            )
            continue
        if key not in known:
            raise ConfigError(key, "unknown key")
        if key not in allowed:
            raise ConfigError(key, f"not a {experiment!r} key")
        if key == "experiment":
            if value != experiment:
                raise ConfigError(key, f"config says {value!r}, command says {experiment!r}")
            continue
        if key in ("epsilon", "delta") and value == "auto":
            setattr(cfg, key, "auto")
            continue
        setattr(cfg, key, _coerce(key, value, _FIELD_TYPES[key]))

    if task_decl:
        cfg.tasks = _assemble_tasks(task_decl)
    _validate(cfg)
    return cfg


def _assemble_tasks(decl: dict[int, dict[str, tuple]]) -> list[tuple[tuple, tuple]]:
    tasks = []
    for k in range(len(decl)):
        if k not in decl:
            raise ConfigError(f"task{k}", "task numbers must be contiguous from 0")
        entry = decl[k]
        if "coords" not in entry or "target" not in entry:
            raise ConfigError(f"task{k}", "needs both coords and target")
        coords = tuple(int(c) for c in entry["coords"])
        target = tuple(float(v) for v in entry["target"])
        if len(coords) != len(target):
            raise ConfigError(f"task{k}", "coords and target lengths differ")
        if any(c < 0 for c in coords):
            raise ConfigError(f"task{k}", "coords must be nonnegative indices")
        tasks.append((coords, target))
    return tasks


def _validate(cfg: ExperimentConfig) -> None:
    for name in _POSITIVE_FIELDS:
        v = getattr(cfg, name)
        if isinstance(v, (int, float)) and v <= 0:
            raise ConfigError(name, f"must be positive, got {v!r}")
    for name in _NONNEGATIVE_FIELDS:
        v = getattr(cfg, name)
        if v < 0:
            raise ConfigError(name, f"must be nonnegative, got {v!r}")
    if isinstance(cfg.epsilon, float) and cfg.epsilon <= 0:
        raise ConfigError("epsilon", f"must be positive, got {cfg.epsilon!r}")
    if isinstance(cfg.delta, float) and cfg.delta <= 0:
        raise ConfigError("delta", f"must be positive, got {cfg.delta!r}")
    if cfg.rho <= 1:
        raise ConfigError("rho", f"must exceed 1, got {cfg.rho!r}")
    if cfg.policy_kind not in ("window", "motif", "fiber"):
        raise ConfigError("policy_kind", f"unknown kind {cfg.policy_kind!r}")
    if cfg.metric not in ("identity", "random_spd"):
        raise ConfigError("metric", f"unknown metric {cfg.metric!r}")
    if cfg.cross_coupling != 0.0:
        raise ConfigError(
            "cross_coupling",
            "leakage is outside the stability guarantee and must stay 0.0",
        )
    if not all(isinstance(v, (int, float)) and v > 0 for v in cfg.l_values):
        raise ConfigError("l_values", "all lengths must be positive")
    if not all(int(v) >= 2 for v in cfg.sample_counts):
        raise ConfigError("sample_counts", "all counts must be at least 2")
    if not all(int(b) >= 2 for b in cfg.tower_bins):
        raise ConfigError("tower_bins", "every level needs at least 2 bins")


def load_config(experiment: str, path: Path | None) -> ExperimentConfig:
    raw = parse_config_text(Path(path).read_text(encoding="utf-8")) if path else {}
    return build_config(experiment, raw)
