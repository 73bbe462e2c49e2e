"""Exception types shared across the pipeline."""


class SleepMinerError(Exception):
    """Base class for all sleepminer errors."""


class ParseError(SleepMinerError):
    """A malformed row or header in an input file."""

    def __init__(self, path, row, column, reason):
        self.path = str(path)
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"{self.path}:{row}: column {column!r}: {reason}")


class OverlapError(SleepMinerError):
    """Two sleep sessions overlap in time."""


class DuplicateDateError(SleepMinerError):
    """Two day records share the same night date."""


class DomainError(SleepMinerError):
    """A value lies outside the domain a function or scheme covers."""


class SchemeError(SleepMinerError):
    """A threshold scheme is malformed (overlap, gap, duplicate label)."""


class UnknownNameError(SleepMinerError):
    """An event or measure name is not one of the known inputs/outputs."""


class InsufficientDataError(SleepMinerError):
    """A sample is too small for the requested statistic."""


class BaseCategoryError(SleepMinerError):
    """An effect was requested for an input's own base category."""


class GeneratorSpecError(SleepMinerError):
    """A synthetic-data generator spec is invalid."""


class EmptyMatrixError(SleepMinerError):
    """A heatmap was requested for an empty count matrix."""


class MixedMeasuresError(SleepMinerError):
    """Screening results for different output measures were mixed."""
