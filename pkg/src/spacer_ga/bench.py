"""Repeated seeded GA runs, accuracy/simulation-count statistics, grid searches.

Run ``i`` of a batch is seeded with ``root_seed + i``.  Records are always
aggregated in run-index order, so results do not depend on ``workers``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .encoding import GridPoint, SearchGrid
from .engine import MAX_SEED, GaConfig, RunRecord, run_ga
from .errors import BudgetError, ConfigError, DomainError
from .landscapes import Landscape, brute_force
from .operators import CrossoverSpec, MutationSpec, SelectionSpec

DEFAULT_RUNS = 500
DEFAULT_RUN_BUDGET = 10**6

CSV_COLUMNS = (
    "selection",
    "crossover_kind",
    "crossover_k",
    "bits",
    "population",
    "generations",
    "mutation_pct",
    "runs",
    "accuracy_pct",
    "mean_unique_evals",
    "std_unique_evals",
)

# Best tuple per table for the three sweeps reported with the method,
# (selection, population, generations, mutation %, mean, std).
PUBLISHED_BEST = {
    "reference_zno": ("tournament", 70, 30, 60, 78.16, 1.65),
    "reference_moox": ("roulette", 5, 100, 75, 13.05, 3.24),
    "reference_2d": ("roulette", 1000, 90, 90, 1758.77, 39.75),
}


@dataclass
class BatchConfig:
    base: GaConfig
    runs: int
    grid: SearchGrid
    landscape: Landscape

    def __post_init__(self):
        if isinstance(self.runs, bool) or not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigError(f"runs must be a positive integer, got {self.runs!r}")
        if self.base.seed + self.runs - 1 > MAX_SEED:
            raise ConfigError("root seed + runs overflows the 64-bit seed range")
        self.base = self.base.resolve(self.grid)

    def seed_of(self, run_index: int) -> int:
        return self.base.seed + run_index


@dataclass(frozen=True)
class BatchStats:
    accuracy_pct: float
    mean_unique_evaluations: float
    std_unique_evaluations: float
    runs: int


def count_stats(counts: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n - 1) standard deviation; std is 0 for a single run."""
    x = np.asarray(counts, dtype=float)
    if x.size == 0:
        raise DomainError("no counts to summarise")
    mean = float(x.mean())
    if x.size == 1 or np.all(x == x[0]):
        return mean, 0.0
    return mean, float(x.std(ddof=1))


def accuracy_of(records: Sequence[RunRecord], argmax_set: Iterable[GridPoint | int]) -> float:
    if not records:
        raise DomainError("accuracy of an empty batch is undefined")
    grid = records[0].grid
    targets = {grid.flat_index(a) if isinstance(a, GridPoint) else int(a) for a in argmax_set}
    hits = sum(r.best_flat in targets for r in records)
    return 100.0 * hits / len(records)


def summarize(records: Sequence[RunRecord], argmax_set: Iterable[GridPoint | int]) -> BatchStats:
    mean, std = count_stats([r.unique_evaluations for r in records])
    stats = BatchStats(accuracy_of(records, argmax_set), mean, std, len(records))
    total = records[0].grid.total_points
    # the lookup table caps every run at one evaluation per grid point
    assert stats.mean_unique_evaluations <= total, (stats, total)
    return stats


def _run_chunk(args):
    configs, grid, landscape, optimum = args
    return [run_ga(c, grid, landscape, optimum) for c in configs]


def _run_all(configs: list[GaConfig], grid, landscape, optimum, workers: int) -> list[RunRecord]:
    if workers <= 1 or len(configs) < 2:
        return _run_chunk((configs, grid, landscape, optimum))
    n_chunks = min(len(configs), workers * 4)
    bounds = np.linspace(0, len(configs), n_chunks + 1).astype(int)
    chunks = [(configs[a:b], grid, landscape, optimum) for a, b in zip(bounds, bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    return [r for part in parts for r in part]


def default_workers() -> int:
    return os.cpu_count() or 1


def run_batch(
    batch: BatchConfig,
    workers: int = 1,
    argmax: Iterable[int] | None = None,
) -> tuple[BatchStats, list[RunRecord]]:
    if argmax is None:
        argmax = brute_force(batch.landscape, batch.grid).argmax_flat
    optimum = frozenset(int(a) for a in argmax)
    configs = [batch.base.with_seed(batch.seed_of(i)) for i in range(batch.runs)]
    records = _run_all(configs, batch.grid, batch.landscape, optimum, workers)
    return summarize(records, optimum), records


@dataclass
class GridSpec:
    populations: list[int]
    generations: list[int]
    mutation_pct: list[float]
    selections: list[SelectionSpec] = field(default_factory=lambda: [SelectionSpec("roulette")])
    crossovers: list[CrossoverSpec] = field(default_factory=lambda: [CrossoverSpec()])
    bit_widths: list[int | None] = field(default_factory=lambda: [None])
    mutation_mode: str = "single_bit"

    def __post_init__(self):
        for name in ("populations", "generations", "mutation_pct", "selections", "crossovers", "bit_widths"):
            if not list(getattr(self, name)):
                raise ConfigError(f"grid_search.{name} must be non-empty")

    @property
    def size(self) -> int:
        return math.prod(
            len(x)
            for x in (self.selections, self.crossovers, self.bit_widths,
                      self.populations, self.generations, self.mutation_pct)
        )

    def tuples(self, base: GaConfig) -> list[GaConfig]:
        """Cartesian product in CSV column order: selection, crossover, bits, p, g, mutation."""
        out = []
        for sel, cx, bits, p, g, mut in itertools.product(
            self.selections, self.crossovers, self.bit_widths,
            self.populations, self.generations, self.mutation_pct,
        ):
            out.append(
                replace(
                    base,
                    selection=sel,
                    crossover=cx,
                    bit_width=bits,
                    population_size=p,
                    max_generation=g,
                    mutation=MutationSpec(mut, self.mutation_mode),
                )
            )
        return out


@dataclass
class GridRow:
    config: GaConfig
    stats: BatchStats

    def key(self) -> tuple:
        c = self.config
        return (c.selection.method, c.crossover.kind, c.crossover.k, c.bit_width,
                c.population_size, c.max_generation, c.mutation.probability_pct)

    def to_csv_row(self) -> list:
        s = self.stats
        return [*self.key(), s.runs, s.accuracy_pct, s.mean_unique_evaluations, s.std_unique_evaluations]


@dataclass
class GridResult:
    rows: list[GridRow]
    winner: GridRow | None
    total_points: int


def pick_winner(rows: Sequence[GridRow]) -> GridRow | None:
    """Fewest mean evaluations at 100 % accuracy; ties by std then tuple order."""
    eligible = [(r.stats.mean_unique_evaluations, r.stats.std_unique_evaluations, i)
                for i, r in enumerate(rows) if r.stats.accuracy_pct == 100.0]
    if not eligible:
        return None
    return rows[min(eligible)[2]]


def grid_search(
    spec: GridSpec,
    base: GaConfig,
    grid: SearchGrid,
    landscape: Landscape,
    runs: int = DEFAULT_RUNS,
    workers: int = 1,
    budget: int = DEFAULT_RUN_BUDGET,
) -> GridResult:
    """One :class:`BatchStats` per tuple, every tuple using the same root seed."""
    total_runs = spec.size * runs
    if total_runs > budget:
        raise BudgetError(
            f"grid of {spec.size} tuples x {runs} runs = {total_runs} runs exceeds the budget of {budget}"
        )
    batches = [BatchConfig(cfg, runs, grid, landscape) for cfg in spec.tuples(base)]
    optimum = brute_force(landscape, grid).argmax_flat
    configs = [b.base.with_seed(b.seed_of(i)) for b in batches for i in range(runs)]
    records = _run_all(configs, grid, landscape, optimum, workers)
    rows = [
        GridRow(b.base, summarize(records[j * runs:(j + 1) * runs], optimum))
        for j, b in enumerate(batches)
    ]
    return GridResult(rows, pick_winner(rows), grid.total_points)


def rows_to_csv(rows: Sequence[GridRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.to_csv_row())
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    out = []
    for row in reader:
        out.append({
            **row,
            "crossover_k": int(row["crossover_k"]),
            "bits": int(row["bits"]),
            "population": int(row["population"]),
            "generations": int(row["generations"]),
            "mutation_pct": float(row["mutation_pct"]),
            "runs": int(row["runs"]),
            "accuracy_pct": float(row["accuracy_pct"]),
            "mean_unique_evals": float(row["mean_unique_evals"]),
            "std_unique_evals": float(row["std_unique_evals"]),
        })
    return out


def _describe(row: GridRow) -> str:
    c, s = row.config, row.stats
    return (
        f"{c.selection.method}, {c.crossover.kind}"
        f"{'' if c.crossover.kind == 'uniform' else f' k={c.crossover.k}'}, {c.bit_width} bits, "
        f"population={c.population_size}, generations={c.max_generation}, "
        f"mutation={c.mutation.probability_pct:g}%: accuracy {s.accuracy_pct:g}%, "
        f"{s.mean_unique_evaluations:.2f} +/- {s.std_unique_evaluations:.2f} simulations"
    )


def report(result: GridResult, landscape_name: str | None = None) -> str:
    lines = [f"tuples: {len(result.rows)}", f"brute-force simulations: {result.total_points}"]
    for row in result.rows:
        lines.append("  " + _describe(row))
    if result.winner is None:
        lines.append("winner: none (no tuple reached 100% accuracy)")
    else:
        lines.append("winner: " + _describe(result.winner))
    published = PUBLISHED_BEST.get(landscape_name or "")
    if published:
        sel, p, g, m, mean, std = published
        lines.append(
            f"published best for this sweep: {sel}, population={p}, generations={g}, "
            f"mutation={m}%: {mean} +/- {std} simulations (measured on the original device data)"
        )
    return "\n".join(lines) + "\n"
