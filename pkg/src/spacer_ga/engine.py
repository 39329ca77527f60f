"""Elitist generational GA with a phenotype-keyed fitness lookup table.

Random streams: a run seeded with ``seed`` draws its initial population from
``SeedSequence(seed, spawn_key=(0,))`` and generation ``g`` (1-based) from
``SeedSequence(seed, spawn_key=(g,))``, all through PCG64.  A run is
therefore a deterministic function of (config, grid, landscape) on every
platform numpy supports.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .encoding import (
    Chromosome,
    GridPoint,
    SearchGrid,
    check_width,
    decode,
    decode_flat,
    effective_bits,
)
from .errors import ConfigError, DomainError, LandscapeError
from .landscapes import Landscape
from .operators import (
    CrossoverSpec,
    MutationSpec,
    SelectionSpec,
    crossover_many,
    mutate_many,
    parent_pool_size,
    select_indices,
)

MAX_SEED = 2**64 - 1


def stream(seed: int, substream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(substream,))))


@dataclass(frozen=True)
class GaConfig:
    population_size: int
    max_generation: int
    mutation: MutationSpec = field(default_factory=MutationSpec)
    selection: SelectionSpec = field(default_factory=SelectionSpec)
    crossover: CrossoverSpec = field(default_factory=CrossoverSpec)
    # None -> effective_bits of the grid the config is run on
    bit_width: int | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("population_size", "max_generation", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        if self.population_size < 2:
            raise ConfigError(f"population_size must be >= 2, got {self.population_size}")
        if self.max_generation < 1:
            raise ConfigError(f"max_generation must be >= 1, got {self.max_generation}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.bit_width is not None and (isinstance(self.bit_width, bool) or not isinstance(self.bit_width, int)):
            raise ConfigError(f"bit_width must be an integer, got {self.bit_width!r}")
        self.selection.validate_for(self.population_size)

    def resolve(self, grid: SearchGrid) -> "GaConfig":
        """Fill in the bit width and check every grid-dependent invariant."""
        width = self.bit_width if self.bit_width is not None else max(1, effective_bits(grid))
        check_width(grid, width)
        self.crossover.validate_for(width)
        return replace(self, bit_width=width)

    def with_seed(self, seed: int) -> "GaConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "population_size": self.population_size,
            "max_generation": self.max_generation,
            "mutation": self.mutation.to_dict(),
            "selection": self.selection.to_dict(),
            "crossover": self.crossover.to_dict(),
            "bit_width": self.bit_width,
            "seed": self.seed,
        }


class EvaluationLedger:
    """Lookup table of already simulated phenotypes.

    Keys are decoded grid points, so genotypes that differ only in
    non-coding bits share one entry.
    """

    def __init__(self, grid: SearchGrid, landscape: Landscape):
        if landscape.grid != grid:
            raise DomainError("landscape is bound to a different grid")
        self.grid = grid
        self.landscape = landscape
        self._values = np.zeros(grid.total_points)
        self._seen = np.zeros(grid.total_points, dtype=bool)
        self.unique_evaluations = 0
        self.total_requests = 0

    def request(self, flat: np.ndarray) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.int64)
        self.total_requests += flat.size
        uniq = np.unique(flat)
        missing = uniq[~self._seen[uniq]]
        if missing.size:
            self._values[missing] = self._evaluate(missing)
            self._seen[missing] = True
            self.unique_evaluations += int(missing.size)
        return self._values[flat]

    def _evaluate(self, flat: np.ndarray) -> np.ndarray:
        try:
            return self.landscape.eval_flat(flat)
        except LandscapeError:
            raise
        except Exception as exc:
            # locate the offending point
            for i in flat:
                point = self.grid.point_at(int(i))
                try:
                    self.landscape.eval_flat(np.array([i]))
                except Exception:
                    raise LandscapeError(
                        f"fitness evaluation failed at {self.grid.describe(point)}: {exc}", point
                    ) from exc
            raise

    def __contains__(self, point: GridPoint) -> bool:
        return bool(self._seen[self.grid.flat_index(point)])

    @property
    def table(self) -> dict[GridPoint, float]:
        return {self.grid.point_at(int(i)): float(self._values[i]) for i in np.flatnonzero(self._seen)}

    @property
    def seen_flat(self) -> np.ndarray:
        return np.flatnonzero(self._seen)


def evaluate_memoized(
    ledger: EvaluationLedger, chromosome: Chromosome, grid: SearchGrid, landscape: Landscape
) -> float:
    if ledger.grid != grid or ledger.landscape is not landscape:
        raise DomainError("ledger belongs to a different grid or landscape")
    decode(chromosome, grid)  # width check
    flat = decode_flat(np.array([chromosome.value], dtype=np.uint64), grid)
    return float(ledger.request(flat)[0])


def reproduce_values(
    pool: np.ndarray,
    n_children: int,
    crossover: CrossoverSpec,
    mutation: MutationSpec,
    width: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Pair ``pool[i]`` with ``pool[L-1-i]``; two children per pair, truncated."""
    pool = np.asarray(pool, dtype=np.uint64)
    L = pool.size
    if L == 0:
        raise DomainError("cannot reproduce from an empty parent pool")
    if n_children < 1 or n_children > 2 * L:
        raise DomainError(f"{n_children} children requested from {L} pairs of two")
    i = np.arange(L)
    p1 = np.repeat(pool[i], 2)[:n_children]
    p2 = np.repeat(pool[L - 1 - i], 2)[:n_children]
    children = crossover_many(p1, p2, crossover, width, rng)
    return mutate_many(children, mutation, width, rng)


def reproduce(
    parent_pool: Sequence[Chromosome],
    n_children: int,
    crossover: CrossoverSpec,
    mutation: MutationSpec,
    rng: np.random.Generator,
) -> list[Chromosome]:
    if not parent_pool:
        raise DomainError("cannot reproduce from an empty parent pool")
    widths = {c.width for c in parent_pool}
    if len(widths) != 1:
        raise DomainError(f"parent pool mixes chromosome widths {sorted(widths)}")
    (width,) = widths
    crossover.validate_for(width)
    values = np.array([c.value for c in parent_pool], dtype=np.uint64)
    out = reproduce_values(values, n_children, crossover, mutation, width, rng)
    return [Chromosome(int(v), width) for v in out]


@dataclass
class GenerationBest:
    gen: int
    best_fitness: float
    best_flat: int
    distinct_phenotypes: int


@dataclass
class RunRecord:
    config: GaConfig
    grid: SearchGrid
    generations: list[GenerationBest]
    final_population: np.ndarray  # genotypes, fittest-first
    final_flat: np.ndarray
    final_scores: np.ndarray
    unique_evaluations: int
    total_requests: int
    converged: bool | None
    elapsed_s: float = 0.0

    @property
    def best_flat(self) -> int:
        return int(self.final_flat[0])

    @property
    def best_point(self) -> GridPoint:
        return self.grid.point_at(self.best_flat)

    @property
    def best_fitness(self) -> float:
        return float(self.final_scores[0])

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "config": self.config.to_dict(),
            "grid": g.to_dicts(),
            "generations": [
                {"gen": r.gen, "best_fitness": r.best_fitness, "best_point": g.thickness(g.point_at(r.best_flat))}
                for r in self.generations
            ],
            "final_population": [
                {"point": g.thickness(g.point_at(int(f))), "fitness": float(s)}
                for f, s in zip(self.final_flat, self.final_scores)
            ],
            "unique_evaluations": self.unique_evaluations,
            "total_requests": self.total_requests,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def initial_population(config: GaConfig, grid: SearchGrid) -> np.ndarray:
    """Uniform grid points, encoded with zeroed non-coding bits."""
    rng = stream(config.seed, 0)
    return rng.integers(0, grid.total_points, size=config.population_size).astype(np.uint64)


def run_ga(
    config: GaConfig,
    grid: SearchGrid,
    landscape: Landscape,
    optimum: Iterable[int] | None = None,
    initial: np.ndarray | None = None,
) -> RunRecord:
    """Run the GA for ``config.max_generation`` generations.

    ``optimum`` is the set of flat argmax indices from a brute-force sweep;
    without it ``converged`` is ``None``.  ``initial`` overrides the sampled
    starting genotypes (it must hold ``population_size`` values).
    """
    config = config.resolve(grid)
    width = config.bit_width
    p = config.population_size
    pool_size = parent_pool_size(p)
    ledger = EvaluationLedger(grid, landscape)
    started = time.perf_counter()

    if initial is None:
        pop = initial_population(config, grid)
    else:
        pop = np.asarray(initial, dtype=np.uint64)
        if pop.shape != (p,):
            raise ConfigError(f"initial population must hold {p} genotypes, got shape {pop.shape}")
        if width < 64 and np.any(pop >> np.uint64(width)):
            raise ConfigError(f"initial genotypes exceed {width} bits")

    history: list[GenerationBest] = []
    for gen in range(1, config.max_generation + 1):
        rng = stream(config.seed, gen)
        flat = decode_flat(pop, grid)
        scores = ledger.request(flat)
        order = np.argsort(-scores, kind="stable")
        pop, flat, scores = pop[order], flat[order], scores[order]
        history.append(GenerationBest(gen, float(scores[0]), int(flat[0]), int(np.unique(flat).size)))
        parents = pop[select_indices(scores, config.selection, pool_size, rng)]
        children = reproduce_values(parents, p - 1, config.crossover, config.mutation, width, rng)
        sorted_pop, sorted_flat, sorted_scores = pop, flat, scores
        pop = np.concatenate([pop[:1], children])

    converged = None if optimum is None else int(sorted_flat[0]) in set(optimum)
    return RunRecord(
        config=config,
        grid=grid,
        generations=history,
        final_population=sorted_pop,
        final_flat=sorted_flat,
        final_scores=sorted_scores,
        unique_evaluations=ledger.unique_evaluations,
        total_requests=ledger.total_requests,
        converged=converged,
        elapsed_s=time.perf_counter() - started,
    )
