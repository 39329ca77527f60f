"""Command-line front end.

Exit codes: 0 ok, 2 config error, 3 data error, 4 budget exceeded.  Outputs
are staged in memory and written atomically only after the command
succeeds, so a failing command never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import bench, config as config_mod
from .encoding import label_of
from .engine import MAX_SEED, run_ga
from .errors import ConfigError, SpacerGAError
from .landscapes import brute_force, export_csv, load_csv


def write_outputs(files: dict[Path, str]) -> None:
    staged = []
    try:
        for path, text in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def cmd_sweep(args) -> int:
    cfg = config_mod.load(args.config)
    result = brute_force(cfg.landscape, cfg.grid)
    out = Path(args.out)
    doc = {"landscape": cfg.landscape_kind, **result.to_dict()}
    table = export_csv(cfg.landscape)
    write_outputs({out.with_suffix(".json"): json.dumps(doc, indent=2) + "\n", out.with_suffix(".csv"): table})
    argmax = " ".join(cfg.grid.describe(p) for p in result.argmax_points)
    print(f"argmax {argmax}, simulations={result.simulation_count}")
    print(f"max fitness {result.max_fitness:.6g}")
    return 0


def cmd_ga(args) -> int:
    cfg = config_mod.load(args.config)
    if cfg.ga is None:
        raise ConfigError("config has no ga section")
    ga = cfg.ga if args.seed is None else cfg.ga.with_seed(args.seed)
    optimum = brute_force(cfg.landscape, cfg.grid).argmax_flat
    record = run_ga(ga, cfg.grid, cfg.landscape, optimum)
    write_outputs({Path(args.out): record.to_json()})
    print(f"best {cfg.grid.describe(record.best_point)} (label {label_of(record.best_point, cfg.grid)}), "
          f"fitness {record.best_fitness:.6g}")
    print(f"unique_evaluations={record.unique_evaluations} total_requests={record.total_requests} "
          f"converged={str(record.converged).lower()}")
    return 0


def _summary_path(out: Path) -> Path:
    return out.with_suffix(".txt") if out.suffix != ".txt" else out.with_suffix(".summary.txt")


def cmd_bench(args) -> int:
    cfg = config_mod.load(args.config)
    if cfg.ga is None or cfg.batch is None:
        raise ConfigError("bench needs both ga and batch sections")
    runs = args.runs or cfg.batch.runs
    root = args.seed if args.seed is not None else cfg.batch.root_seed
    base = cfg.ga if root is None else cfg.ga.with_seed(root)
    batch = bench.BatchConfig(base, runs, cfg.grid, cfg.landscape)
    stats, _ = bench.run_batch(batch, workers=args.workers)
    result = bench.GridResult([bench.GridRow(batch.base, stats)], None, cfg.grid.total_points)
    result.winner = bench.pick_winner(result.rows)
    summary = bench.report(result, cfg.landscape_kind)
    out = Path(args.out)
    write_outputs({out: bench.rows_to_csv(result.rows), _summary_path(out): summary})
    sys.stdout.write(summary)
    return 0


def cmd_grid(args) -> int:
    cfg = config_mod.load(args.config)
    if cfg.grid_search is None:
        raise ConfigError("config has no grid_search section")
    base = cfg.ga if args.seed is None else cfg.ga.with_seed(args.seed)
    result = bench.grid_search(
        cfg.grid_search,
        base,
        cfg.grid,
        cfg.landscape,
        runs=args.runs or cfg.grid_runs,
        workers=args.workers,
        budget=cfg.grid_budget,
    )
    summary = bench.report(result, cfg.landscape_kind)
    out = Path(args.out)
    write_outputs({out: bench.rows_to_csv(result.rows), _summary_path(out): summary})
    sys.stdout.write(summary)
    return 0


def cmd_landscape(args) -> int:
    if args.action == "export":
        if not args.config or not args.out:
            raise ConfigError("landscape export needs --config and --out")
        cfg = config_mod.load(args.config)
        write_outputs({Path(args.out): export_csv(cfg.landscape)})
        print(f"exported {cfg.grid.total_points} points to {args.out}")
        return 0
    if args.csv:
        landscape = load_csv(args.csv)
    elif args.config:
        landscape = config_mod.load(args.config).landscape
    else:
        raise ConfigError("landscape validate needs --csv or --config")
    grid = landscape.grid
    axes = ", ".join(f"{a.name} {a.min_nm}..{a.max_nm} step {a.step_nm}" for a in grid.axes)
    print(f"ok: {grid.total_points} points ({axes})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spacer-ga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", required=True, help="run-config JSON file")
        p.add_argument("--out", required=out_required, help="output path")

    p = sub.add_parser("sweep", help="brute-force every grid point")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ga", help="one GA run, RunRecord JSON")
    common(p)
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_ga)

    for name, func, help_ in (("bench", cmd_bench, "repeated seeded runs of one tuple"),
                              ("grid", cmd_grid, "hyperparameter grid search")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--seed", type=_seed, help="root seed override")
        p.add_argument("--runs", type=_positive)
        p.add_argument("--workers", type=_positive, default=bench.default_workers())
        p.set_defaults(func=func)

    p = sub.add_parser("landscape", help="export or validate landscape CSV data")
    p.add_argument("action", choices=("export", "validate"))
    p.add_argument("--config")
    p.add_argument("--csv", help="landscape CSV to validate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_landscape)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpacerGAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
