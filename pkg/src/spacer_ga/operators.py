"""Selection, crossover and mutation.

Every operator exists in two forms: a vectorised core working on arrays of
population indices or ``uint64`` genotypes (used by the engine), and a thin
wrapper over :class:`~spacer_ga.encoding.Chromosome` values.  The wrappers
call the cores, so both forms consume the random stream identically.

All functions are pure given an explicit :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import Chromosome
from .errors import ConfigError, DomainError

SELECTION_METHODS = ("random", "tournament", "roulette", "breeder")
CROSSOVER_KINDS = ("uniform", "k_point")
MUTATION_MODES = ("single_bit", "per_bit")


@dataclass(frozen=True)
class SelectionSpec:
    method: str = "roulette"
    tournament_k: int = 3
    breeder_top_fraction: float = 0.8
    # None -> ceil(0.1 * pool_size), resolved at selection time
    breeder_lucky_count: int | None = None

    def __post_init__(self):
        if self.method not in SELECTION_METHODS:
            raise ConfigError(f"unknown selection method {self.method!r}; choose from {SELECTION_METHODS}")
        if not isinstance(self.tournament_k, int) or self.tournament_k < 1:
            raise ConfigError(f"tournament_k must be a positive integer, got {self.tournament_k!r}")
        if not 0 < self.breeder_top_fraction <= 1:
            raise ConfigError(f"breeder_top_fraction must be in (0, 1], got {self.breeder_top_fraction}")
        if self.breeder_lucky_count is not None and (
            not isinstance(self.breeder_lucky_count, int) or self.breeder_lucky_count < 0
        ):
            raise ConfigError(f"breeder_lucky_count must be a non-negative integer, got {self.breeder_lucky_count!r}")

    def lucky_count(self, pool_size: int) -> int:
        if self.breeder_lucky_count is None:
            return math.ceil(0.1 * pool_size)
        return self.breeder_lucky_count

    def validate_for(self, population_size: int) -> None:
        pool = parent_pool_size(population_size)
        if self.method == "breeder" and self.breeder_lucky_count is not None and self.breeder_lucky_count >= pool:
            raise ConfigError(
                f"breeder_lucky_count {self.breeder_lucky_count} must be below the parent pool size {pool}"
            )

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "tournament_k": self.tournament_k,
            "breeder_top_fraction": self.breeder_top_fraction,
            "breeder_lucky_count": self.breeder_lucky_count,
        }

    @property
    def label(self) -> str:
        return self.method


@dataclass(frozen=True)
class CrossoverSpec:
    kind: str = "uniform"
    k: int = 1

    def __post_init__(self):
        if self.kind not in CROSSOVER_KINDS:
            raise ConfigError(f"unknown crossover kind {self.kind!r}; choose from {CROSSOVER_KINDS}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError(f"crossover k must be a positive integer, got {self.k!r}")

    def validate_for(self, width: int) -> None:
        if self.kind == "k_point" and self.k >= width:
            raise ConfigError(f"k_point crossover needs k < chromosome width ({self.k} >= {width})")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True)
class MutationSpec:
    probability_pct: float = 10.0
    mode: str = "single_bit"

    def __post_init__(self):
        if isinstance(self.probability_pct, bool) or not 0 <= self.probability_pct <= 100:
            raise ConfigError(f"mutation probability_pct must be in [0, 100], got {self.probability_pct!r}")
        if self.mode not in MUTATION_MODES:
            raise ConfigError(f"unknown mutation mode {self.mode!r}; choose from {MUTATION_MODES}")

    @property
    def rate(self) -> float:
        return self.probability_pct / 100.0

    def to_dict(self) -> dict:
        return {"probability_pct": self.probability_pct, "mode": self.mode}


def parent_pool_size(population_size: int) -> int:
    return math.ceil(population_size / 2)


def _width_mask(width: int) -> np.uint64:
    return np.uint64((1 << width) - 1)


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """(n, B) 0/1 array, column j = bit position j from the LSB -> uint64 values."""
    weights = np.left_shift(np.uint64(1), np.arange(bits.shape[1], dtype=np.uint64))
    return (bits.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)


# -- selection ---------------------------------------------------------------


def roulette_probabilities(scores: Sequence[float]) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise DomainError("roulette needs at least one score")
    shifted = s - min(0.0, float(s.min()))
    total = shifted.sum()
    if total <= 0:
        return np.full(s.size, 1.0 / s.size)
    return shifted / total


def select_indices(
    scores_sorted: np.ndarray,
    spec: SelectionSpec,
    pool_size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Indices into a fittest-first population forming the parent pool.

    The result is ordered fittest-first (ascending index) for every method
    except ``random``, which keeps draw order.
    """
    scores_sorted = np.asarray(scores_sorted, dtype=float)
    p = scores_sorted.size
    if p == 0:
        raise DomainError("cannot select from an empty population")
    if pool_size < 1:
        raise DomainError(f"pool_size must be positive, got {pool_size}")

    if spec.method == "random":
        return rng.integers(0, p, size=pool_size)

    if spec.method == "tournament":
        entrants = rng.integers(0, p, size=(pool_size, spec.tournament_k))
        # lowest index in a fittest-first population is the fittest entrant
        return np.sort(entrants.min(axis=1))

    if spec.method == "roulette":
        probs = roulette_probabilities(scores_sorted)
        return np.sort(rng.choice(p, size=pool_size, p=probs))

    # breeder
    if pool_size > p:
        raise DomainError(f"breeder pool of {pool_size} exceeds population of {p}")
    n_top = min(math.ceil(spec.breeder_top_fraction * pool_size), pool_size)
    n_lucky = min(spec.lucky_count(pool_size), pool_size - n_top)
    chosen = list(range(n_top))
    if n_lucky:
        lucky = rng.choice(np.arange(n_top, p), size=n_lucky, replace=False)
        chosen.extend(int(i) for i in lucky)
    taken = set(chosen)
    nxt = n_top
    while len(chosen) < pool_size:
        if nxt not in taken:
            chosen.append(nxt)
        nxt += 1
    return np.sort(np.asarray(chosen, dtype=np.int64))


def select(
    pop_sorted: Sequence[Chromosome],
    scores_sorted: Sequence[float],
    spec: SelectionSpec,
    pool_size: int,
    rng: np.random.Generator,
) -> list[Chromosome]:
    if len(pop_sorted) != len(scores_sorted):
        raise DomainError("population and scores differ in length")
    idx = select_indices(np.asarray(scores_sorted, dtype=float), spec, pool_size, rng)
    return [pop_sorted[int(i)] for i in idx]


# -- crossover ---------------------------------------------------------------


def segment_cuts(width: int, k: int) -> list[int]:
    """Evenly spaced cut positions ``round(i * B / (k + 1))``, rounding half up."""
    if k >= width:
        raise ConfigError(f"k_point crossover needs k < chromosome width ({k} >= {width})")
    return [math.floor(i * width / (k + 1) + 0.5) for i in range(1, k + 1)]


def segment_masks(width: int, k: int) -> np.ndarray:
    """One uint64 mask per segment, LSB segment first."""
    edges = [0, *segment_cuts(width, k), width]
    return np.array(
        [((1 << hi) - 1) ^ ((1 << lo) - 1) for lo, hi in zip(edges, edges[1:])],
        dtype=np.uint64,
    )


def crossover_many(
    parents1: np.ndarray,
    parents2: np.ndarray,
    spec: CrossoverSpec,
    width: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One child per row; a set mask bit takes that position from parent 2."""
    p1 = np.asarray(parents1, dtype=np.uint64)
    p2 = np.asarray(parents2, dtype=np.uint64)
    if p1.shape != p2.shape:
        raise DomainError("parent arrays differ in shape")
    n = p1.size
    if spec.kind == "uniform":
        mask = _pack_bits(rng.integers(0, 2, size=(n, width), dtype=np.uint8))
    else:
        spec.validate_for(width)
        segs = segment_masks(width, spec.k)
        pick = rng.integers(0, 2, size=(n, segs.size), dtype=np.uint8).astype(bool)
        mask = np.bitwise_or.reduce(np.where(pick, segs, np.uint64(0)), axis=1)
    mask &= _width_mask(width)
    return (p1 & ~mask) | (p2 & mask)


def crossover(
    parent1: Chromosome,
    parent2: Chromosome,
    spec: CrossoverSpec,
    rng: np.random.Generator,
) -> Chromosome:
    if parent1.width != parent2.width:
        raise DomainError(f"parents differ in width ({parent1.width} vs {parent2.width})")
    spec.validate_for(parent1.width)
    child = crossover_many(
        np.array([parent1.value], dtype=np.uint64),
        np.array([parent2.value], dtype=np.uint64),
        spec,
        parent1.width,
        rng,
    )
    return Chromosome(int(child[0]), parent1.width)


# -- mutation ----------------------------------------------------------------


def mutate_many(values: np.ndarray, spec: MutationSpec, width: int, rng: np.random.Generator) -> np.ndarray:
    v = np.asarray(values, dtype=np.uint64)
    n = v.size
    q = spec.rate
    if spec.mode == "single_bit":
        hit = rng.random(n) < q
        pos = rng.integers(0, width, size=n).astype(np.uint64)
        flips = np.where(hit, np.left_shift(np.uint64(1), pos), np.uint64(0))
    else:
        flips = _pack_bits(rng.random((n, width)) < q)
    return v ^ flips


def mutate(chromosome: Chromosome, spec: MutationSpec, rng: np.random.Generator) -> Chromosome:
    out = mutate_many(np.array([chromosome.value], dtype=np.uint64), spec, chromosome.width, rng)
    return Chromosome(int(out[0]), chromosome.width)
