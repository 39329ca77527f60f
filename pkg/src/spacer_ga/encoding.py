"""Discrete thickness grids, bit-string genotypes and the mappings between them.

Conventions used throughout the package:

* A grid point is identified by one 0-based index per axis.  Its *label* is
  the mixed-radix number formed by those indices (first axis most
  significant) plus one, so labels run over ``1..total_points``.
* A chromosome is an unsigned integer of ``width`` bits.  ``bits`` renders it
  most-significant bit first; bit *positions* (mutation, crossover cuts) are
  counted from the least-significant bit.
* Only the lowest ``effective_bits(grid)`` bits are coding.  Their value,
  taken modulo ``total_points``, is the 0-based flat index of the phenotype.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, DomainError

MAX_AXES = 8
MAX_BITS = 64


@dataclass(frozen=True)
class Axis:
    name: str
    min_nm: int
    max_nm: int
    step_nm: int = 1

    def __post_init__(self):
        for field in ("min_nm", "max_nm", "step_nm"):
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"axis {self.name!r}: {field} must be an integer, got {value!r}")
            object.__setattr__(self, field, int(value))
        if not self.name:
            raise ConfigError("axis name must be non-empty")
        if self.step_nm < 1:
            raise ConfigError(f"axis {self.name!r}: step_nm must be >= 1, got {self.step_nm}")
        if self.max_nm < self.min_nm:
            raise ConfigError(f"axis {self.name!r}: max_nm < min_nm")
        if (self.max_nm - self.min_nm) % self.step_nm:
            raise ConfigError(
                f"axis {self.name!r}: range {self.min_nm}..{self.max_nm} "
                f"is not a multiple of step {self.step_nm}"
            )
        if self.max_nm == self.min_nm:
            # step is meaningless on a single-point axis; canonical form keeps equality well defined
            object.__setattr__(self, "step_nm", 1)

    @property
    def points(self) -> int:
        return (self.max_nm - self.min_nm) // self.step_nm + 1

    def thickness(self, index: int) -> int:
        return self.min_nm + index * self.step_nm

    def thicknesses(self) -> np.ndarray:
        return np.arange(self.min_nm, self.max_nm + 1, self.step_nm)

    def to_dict(self) -> dict:
        return {"name": self.name, "min_nm": self.min_nm, "max_nm": self.max_nm, "step_nm": self.step_nm}


@dataclass(frozen=True)
class SearchGrid:
    axes: tuple[Axis, ...]

    def __post_init__(self):
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        if not 1 <= len(axes) <= MAX_AXES:
            raise ConfigError(f"a grid needs 1..{MAX_AXES} axes, got {len(axes)}")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate axis names: {names}")

    @classmethod
    def from_dicts(cls, axes: Sequence[dict]) -> "SearchGrid":
        out = []
        for spec in axes:
            unknown = set(spec) - {"name", "min_nm", "max_nm", "step_nm"}
            if unknown:
                raise ConfigError(f"unknown axis keys: {sorted(unknown)}")
            try:
                out.append(Axis(spec["name"], spec["min_nm"], spec["max_nm"], spec.get("step_nm", 1)))
            except KeyError as exc:
                raise ConfigError(f"axis is missing {exc.args[0]!r}") from None
        return cls(tuple(out))

    def to_dicts(self) -> list[dict]:
        return [a.to_dict() for a in self.axes]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.points for a in self.axes)

    @property
    def total_points(self) -> int:
        return math.prod(self.shape)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def __len__(self) -> int:
        return self.total_points

    def __iter__(self) -> Iterator["GridPoint"]:
        for flat in range(self.total_points):
            yield self.point_at(flat)

    def point_at(self, flat: int) -> "GridPoint":
        """0-based flat index (label - 1) to grid point."""
        return GridPoint(tuple(int(i) for i in np.unravel_index(int(flat), self.shape)))

    def flat_index(self, point: "GridPoint") -> int:
        self.check(point)
        return int(np.ravel_multi_index(point.indices, self.shape))

    def check(self, point: "GridPoint") -> None:
        if len(point.indices) != len(self.axes):
            raise DomainError(f"point {point.indices} has {len(point.indices)} indices, grid has {len(self.axes)} axes")
        for i, axis in zip(point.indices, self.axes):
            if not 0 <= i < axis.points:
                raise DomainError(f"index {i} outside axis {axis.name!r} (0..{axis.points - 1})")

    def point_from_nm(self, **thickness: int) -> "GridPoint":
        """Grid point from thicknesses keyed by axis name."""
        if set(thickness) != set(self.names):
            raise DomainError(f"expected thicknesses for {self.names}, got {sorted(thickness)}")
        indices = []
        for axis in self.axes:
            nm = thickness[axis.name]
            offset = nm - axis.min_nm
            if offset % axis.step_nm or not axis.min_nm <= nm <= axis.max_nm:
                raise DomainError(f"{nm} nm is not on axis {axis.name!r}")
            indices.append(offset // axis.step_nm)
        return GridPoint(tuple(indices))

    def thickness(self, point: "GridPoint") -> dict[str, int]:
        self.check(point)
        return {a.name: a.thickness(i) for a, i in zip(self.axes, point.indices)}

    def coordinates(self) -> np.ndarray:
        """(total_points, n_axes) array of thicknesses in label order."""
        mesh = np.meshgrid(*(a.thicknesses() for a in self.axes), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def describe(self, point: "GridPoint") -> str:
        if len(self.axes) == 1:
            return f"t={self.axes[0].thickness(point.indices[0])}nm"
        return ",".join(f"{k}={v}nm" for k, v in self.thickness(point).items())


@dataclass(frozen=True, order=True)
class GridPoint:
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


@dataclass(frozen=True)
class Chromosome:
    """Fixed-width bit string stored as an unsigned integer."""

    value: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_BITS:
            raise ConfigError(f"chromosome width must be in 1..{MAX_BITS}, got {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise DomainError(f"value {self.value} does not fit in {self.width} bits")
        object.__setattr__(self, "value", int(self.value))

    @classmethod
    def from_bits(cls, bits: Sequence[int] | str) -> "Chromosome":
        """Build from most-significant-first digits, e.g. ``"01000"``."""
        digits = [int(b) for b in bits]
        if any(d not in (0, 1) for d in digits):
            raise DomainError(f"not a bit string: {bits!r}")
        return cls(int("".join(map(str, digits)) or "0", 2), len(digits))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(c) for c in format(self.value, f"0{self.width}b"))

    def __str__(self) -> str:
        return format(self.value, f"0{self.width}b")

    def bit(self, position: int) -> int:
        """Bit at ``position`` counted from the least-significant end."""
        return (self.value >> position) & 1

    def flip(self, position: int) -> "Chromosome":
        if not 0 <= position < self.width:
            raise DomainError(f"bit position {position} outside width {self.width}")
        return Chromosome(self.value ^ (1 << position), self.width)


def effective_bits(grid: SearchGrid) -> int:
    """Number of low-order coding bits, ``ceil(log2(total_points))``."""
    return max(0, (grid.total_points - 1).bit_length())


def check_width(grid: SearchGrid, width: int) -> None:
    needed = effective_bits(grid)
    if not 1 <= width <= MAX_BITS:
        raise ConfigError(f"bit width must be in 1..{MAX_BITS}, got {width}")
    if width < needed:
        raise ConfigError(f"bit width {width} too small: grid of {grid.total_points} points needs {needed} bits")


def label_of(point: GridPoint, grid: SearchGrid) -> int:
    return grid.flat_index(point) + 1


def point_of_label(label: int, grid: SearchGrid) -> GridPoint:
    if not 1 <= label <= grid.total_points:
        raise DomainError(f"label {label} outside 1..{grid.total_points}")
    return grid.point_at(label - 1)


def decode_flat(values: np.ndarray, grid: SearchGrid) -> np.ndarray:
    """Vectorised genotype -> 0-based flat phenotype index."""
    mask = np.uint64((1 << effective_bits(grid)) - 1)
    return ((np.asarray(values, dtype=np.uint64) & mask) % np.uint64(grid.total_points)).astype(np.int64)


def decode(chromosome: Chromosome, grid: SearchGrid) -> GridPoint:
    check_width(grid, chromosome.width)
    coding = chromosome.value & ((1 << effective_bits(grid)) - 1)
    return point_of_label(coding % grid.total_points + 1, grid)


def encode(point: GridPoint, grid: SearchGrid, width: int) -> Chromosome:
    check_width(grid, width)
    return Chromosome(grid.flat_index(point), width)
