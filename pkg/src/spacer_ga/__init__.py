"""Genetic-algorithm search over discrete layer-thickness grids.

Fitness lookups are memoised per phenotype, so the number of distinct
evaluations can be compared directly with an exhaustive parameter sweep.
"""

from .encoding import Axis, Chromosome, GridPoint, SearchGrid, decode, encode, label_of, point_of_label
from .engine import EvaluationLedger, GaConfig, RunRecord, evaluate_memoized, reproduce, run_ga
from .errors import BudgetError, ConfigError, DataError, DomainError, LandscapeError
from .landscapes import (
    TabulatedLandscape,
    brute_force,
    load_csv,
    make_reference_2d,
    make_reference_moox,
    make_reference_zno,
)
from .operators import CrossoverSpec, MutationSpec, SelectionSpec, crossover, mutate, select

__version__ = "0.1.0"
