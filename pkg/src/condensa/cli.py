"""Command line interface.

    condensa <experiment> [--config PATH] [--seed N] [--out DIR] [--svg]
    condensa validate <matrix-file>
    condensa cover <matrix-file> --epsilon E [--exact]

Exit codes: 0 success, 1 assertion failure, 2 config error, 3 I/O error.
CONDENSA_OUT provides the default output directory; --out overrides it.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import EXPERIMENTS, load_config
from .cover import CSV_HEADER_COVER, covering_number_exact, covering_number_greedy
from .errors import CondensaError, ConfigError, ExperimentFailed
from .experiments import run_experiment
from .fileio import read_matrix


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condensa",
        description="Finite-metric condensation experiments and matrix utilities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None, help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--svg", action="store_true", help="also render SVG figures")
        p.set_defaults(func=_run_experiment_cmd, experiment=name)

    v = sub.add_parser("validate", help="validate a distance-matrix file")
    v.add_argument("matrix_file", type=Path)
    v.set_defaults(func=_run_validate_cmd)

    c = sub.add_parser("cover", help="covering number of a distance-matrix file")
    c.add_argument("matrix_file", type=Path)
    c.add_argument("--epsilon", type=float, required=True)
    c.add_argument("--exact", action="store_true", help="exact solver (default greedy)")
    c.set_defaults(func=_run_cover_cmd)
    return parser


def _resolve_out(args, cfg) -> Path:
    if args.out is not None:
        return args.out
    if cfg.output_dir is not None:
        return Path(cfg.output_dir)
    env = os.environ.get("CONDENSA_OUT")
    if env:
        return Path(env)
    return Path("condensa_out")


def _run_experiment_cmd(args) -> int:
    cfg = load_config(args.experiment, args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.svg:
        cfg.emit_svg = True
    cfg.output_dir = _resolve_out(args, cfg)
    files = run_experiment(cfg)
    for path in files:
        print(path)
    return 0


def _run_validate_cmd(args) -> int:
    space = read_matrix(args.matrix_file)
    print(f"ok: {space.n} points, diameter {space.diameter()!r}")
    return 0


def _run_cover_cmd(args) -> int:
    space = read_matrix(args.matrix_file)
    if args.exact:
        result = covering_number_exact(space, args.epsilon, n_exact_max=space.n)
    else:
        result = covering_number_greedy(space, args.epsilon)
    print(",".join(CSV_HEADER_COVER))
    print(",".join(result.to_csv_row()))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ExperimentFailed as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except CondensaError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
