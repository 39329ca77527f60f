"""Exception hierarchy shared by every module.

Each class maps to one CLI exit code, see :mod:`spacer_ga.cli`.
"""


class SpacerGAError(Exception):
    exit_code = 1


class DomainError(SpacerGAError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 2


class ConfigError(SpacerGAError, ValueError):
    """A configuration violates an invariant."""

    exit_code = 2


class DataError(SpacerGAError, ValueError):
    """Input data (e.g. a landscape CSV) is malformed."""

    exit_code = 3


class BudgetError(SpacerGAError):
    """Requested work exceeds the configured cap."""

    exit_code = 4


class LandscapeError(SpacerGAError):
    """Fitness evaluation failed at a specific grid point."""

    exit_code = 3

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
