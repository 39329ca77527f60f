"""Run-config file parsing.

A config is one JSON object::

    {
      "grid": [{"name": "ZnO", "min_nm": 0, "max_nm": 80, "step_nm": 1}],
      "landscape": {"kind": "reference_zno"},
      "ga": {"population_size": 70, "max_generation": 30,
             "mutation": {"probability_pct": 60, "mode": "single_bit"},
             "selection": {"method": "tournament", "tournament_k": 3},
             "crossover": {"kind": "uniform"},
             "bit_width": 7, "seed": 0},
      "batch": {"runs": 500, "root_seed": 0},
      "grid_search": {"populations": [10, 20], "generations": [10, 20],
                      "mutation_pct": [50, 75], "selections": ["roulette"],
                      "crossovers": [{"kind": "uniform"}], "bit_widths": [null]}
    }

``grid`` is optional for built-in reference landscapes and for tabulated
ones (the CSV defines the axes); when present it must match.  Unknown keys
anywhere are rejected, and everything is validated before any evaluation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .bench import DEFAULT_RUN_BUDGET, DEFAULT_RUNS, GridSpec
from .encoding import SearchGrid
from .engine import GaConfig
from .errors import ConfigError, DataError
from .landscapes import REFERENCES, Landscape, load_csv
from .operators import CrossoverSpec, MutationSpec, SelectionSpec

LANDSCAPE_KINDS = ("tabulated", *REFERENCES)


@dataclass
class BatchSection:
    runs: int = DEFAULT_RUNS
    root_seed: int | None = None


@dataclass
class RunConfig:
    grid: SearchGrid
    landscape: Landscape
    landscape_kind: str
    ga: GaConfig | None
    batch: BatchSection | None
    grid_search: GridSpec | None
    grid_runs: int = DEFAULT_RUNS
    grid_budget: int = DEFAULT_RUN_BUDGET


def _keys(section: dict, where: str, allowed: set[str], required: set[str] = frozenset()) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(section)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _int(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where} must be >= {minimum}, got {value}")
    return value


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return value


def parse_selection(raw, where: str = "selection") -> SelectionSpec:
    if isinstance(raw, str):
        return SelectionSpec(raw)
    _keys(raw, where, {"method", "tournament_k", "breeder_top_fraction", "breeder_lucky_count"}, {"method"})
    kwargs = dict(raw)
    if "breeder_top_fraction" in kwargs:
        _number(kwargs["breeder_top_fraction"], f"{where}.breeder_top_fraction")
    return SelectionSpec(**kwargs)


def parse_crossover(raw, where: str = "crossover") -> CrossoverSpec:
    if isinstance(raw, str):
        return CrossoverSpec(raw)
    _keys(raw, where, {"kind", "k"}, {"kind"})
    return CrossoverSpec(**raw)


def parse_mutation(raw, where: str = "mutation") -> MutationSpec:
    _keys(raw, where, {"probability_pct", "mode"}, {"probability_pct"})
    _number(raw["probability_pct"], f"{where}.probability_pct")
    return MutationSpec(**raw)


def parse_ga(raw: dict) -> GaConfig:
    _keys(
        raw,
        "ga",
        {"population_size", "max_generation", "mutation", "selection", "crossover", "bit_width", "seed"},
        {"population_size", "max_generation"},
    )
    return GaConfig(
        population_size=_int(raw["population_size"], "ga.population_size"),
        max_generation=_int(raw["max_generation"], "ga.max_generation"),
        mutation=parse_mutation(raw.get("mutation", {"probability_pct": 10}), "ga.mutation"),
        selection=parse_selection(raw.get("selection", "roulette"), "ga.selection"),
        crossover=parse_crossover(raw.get("crossover", "uniform"), "ga.crossover"),
        bit_width=None if raw.get("bit_width") is None else _int(raw["bit_width"], "ga.bit_width", 1),
        seed=_int(raw.get("seed", 0), "ga.seed", 0),
    )


def parse_grid_search(raw: dict, base: GaConfig) -> tuple[GridSpec, int, int]:
    """Lists left out default to the single value in the ``ga`` section."""
    _keys(
        raw,
        "grid_search",
        {"populations", "generations", "mutation_pct", "selections", "crossovers", "bit_widths",
         "mutation_mode", "runs", "budget"},
        {"populations", "generations", "mutation_pct"},
    )
    for name in ("populations", "generations", "mutation_pct", "selections", "crossovers", "bit_widths"):
        if name in raw and not isinstance(raw[name], list):
            raise ConfigError(f"grid_search.{name} must be a list")
    spec = GridSpec(
        populations=[_int(v, "grid_search.populations[]", 2) for v in raw["populations"]],
        generations=[_int(v, "grid_search.generations[]", 1) for v in raw["generations"]],
        mutation_pct=[_number(v, "grid_search.mutation_pct[]") for v in raw["mutation_pct"]],
        selections=[parse_selection(s, "grid_search.selections[]") for s in raw.get("selections", [base.selection.to_dict()])],
        crossovers=[parse_crossover(c, "grid_search.crossovers[]") for c in raw.get("crossovers", [base.crossover.to_dict()])],
        bit_widths=[None if b is None else _int(b, "grid_search.bit_widths[]", 1) for b in raw.get("bit_widths", [base.bit_width])],
        mutation_mode=raw.get("mutation_mode", base.mutation.mode),
    )
    for m in spec.mutation_pct:
        MutationSpec(m, spec.mutation_mode)
    runs = _int(raw.get("runs", DEFAULT_RUNS), "grid_search.runs", 1)
    budget = _int(raw.get("budget", DEFAULT_RUN_BUDGET), "grid_search.budget", 1)
    return spec, runs, budget


def build_landscape(raw: dict, base_dir: Path) -> tuple[str, SearchGrid, Landscape]:
    _keys(raw, "landscape", {"kind", "path"}, {"kind"})
    kind = raw["kind"]
    if kind not in LANDSCAPE_KINDS:
        raise ConfigError(f"landscape.kind must be one of {LANDSCAPE_KINDS}, got {kind!r}")
    if kind == "tabulated":
        if "path" not in raw:
            raise ConfigError("a tabulated landscape needs landscape.path")
        path = base_dir / raw["path"]
        try:
            landscape = load_csv(path, name=Path(raw["path"]).stem)
        except OSError as exc:
            raise DataError(f"cannot read landscape CSV {path}: {exc.strerror}") from None
        return kind, landscape.grid, landscape
    if "path" in raw:
        raise ConfigError(f"landscape.path is only valid for tabulated landscapes, not {kind!r}")
    grid, landscape = REFERENCES[kind]()
    return kind, grid, landscape


def parse(doc: dict, base_dir: Path | str = ".") -> RunConfig:
    _keys(doc, "config", {"grid", "landscape", "ga", "batch", "grid_search"}, {"landscape"})
    declared = None
    if "grid" in doc:
        axes = doc["grid"]["axes"] if isinstance(doc["grid"], dict) and "axes" in doc["grid"] else doc["grid"]
        if isinstance(doc["grid"], dict):
            _keys(doc["grid"], "grid", {"axes"}, {"axes"})
        if not isinstance(axes, list):
            raise ConfigError("grid must be a list of axes")
        declared = SearchGrid.from_dicts(axes)

    kind, grid, landscape = build_landscape(doc["landscape"], Path(base_dir))
    if declared is not None and declared != grid:
        raise ConfigError(f"declared grid {declared.to_dicts()} does not match the landscape grid {grid.to_dicts()}")

    ga = None
    if "ga" in doc:
        ga = parse_ga(doc["ga"]).resolve(grid)

    batch = None
    if "batch" in doc:
        raw = doc["batch"]
        _keys(raw, "batch", {"runs", "root_seed"})
        batch = BatchSection(
            runs=_int(raw.get("runs", DEFAULT_RUNS), "batch.runs", 1),
            root_seed=None if raw.get("root_seed") is None else _int(raw["root_seed"], "batch.root_seed", 0),
        )

    spec, runs, budget = None, DEFAULT_RUNS, DEFAULT_RUN_BUDGET
    if "grid_search" in doc:
        if ga is None:
            raise ConfigError("grid_search needs a ga section for the non-swept fields (seed, operator options)")
        spec, runs, budget = parse_grid_search(doc["grid_search"], ga)
        for cfg in spec.tuples(ga):
            cfg.resolve(grid)

    return RunConfig(grid, landscape, kind, ga, batch, spec, runs, budget)


def load(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse(doc, path.parent)
