"""Domain types for per-night sleep and lifestyle records.

A record describes one night of sleep together with the waking-period
lifestyle measurements that preceded it; every experiment downstream runs
over these records (or the categorical feature rows derived from them).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime
from typing import Mapping

from .errors import UnknownNameError

# The four continuous sleep-quality measures of a night (the output events).
OUTPUT_MEASURES: tuple[str, ...] = (
    "latency_min",
    "awake_min",
    "awakenings_gt5",
    "efficiency",
)

# The ten categorical input/confounder events of a night.
INPUT_EVENTS: tuple[str, ...] = (
    "prev_latency",
    "prev_awake_min",
    "prev_awakenings",
    "prev_efficiency",
    "exercise_day",
    "exercise_week",
    "eat_sleep_interval",
    "awake_between",
    "start_temp",
    "start_humidity",
)

# Previous-night quality inputs and the output measure each one lags.
PREV_NIGHT_SOURCE: dict[str, str] = {
    "prev_latency": "latency_min",
    "prev_awake_min": "awake_min",
    "prev_awakenings": "awakenings_gt5",
    "prev_efficiency": "efficiency",
}

# Inputs measured during the waking period itself (not lagged).
LIFESTYLE_EVENTS: tuple[str, ...] = (
    "exercise_day",
    "exercise_week",
    "eat_sleep_interval",
    "awake_between",
    "start_temp",
    "start_humidity",
)


@dataclass(frozen=True)
class SleepSession:
    """One scored night of sleep.

    Timestamps are local civil time; no zone arithmetic is applied.
    `awakenings_gt5` counts within-night awakenings longer than five
    minutes; it is stored as a float so all four measures can be fed to
    the same two-sample tests.
    """

    onset: datetime
    wake: datetime
    latency_min: float
    awake_min: float
    awakenings_gt5: float
    efficiency: float

    @property
    def in_bed_min(self) -> float:
        return (self.wake - self.onset).total_seconds() / 60.0


@dataclass(frozen=True)
class ActivityEvent:
    """A single exercise activity."""

    start: datetime
    duration_min: float
    kind: str


@dataclass(frozen=True)
class EnvSample:
    """A point sample of bedroom temperature and humidity."""

    at: datetime
    temperature_f: float
    humidity_pct: float


@dataclass(frozen=True)
class MealEvent:
    """A timestamped eating event."""

    at: datetime


@dataclass(frozen=True)
class DayRecord:
    """One night of sleep plus the waking period that led into it.

    `night_date` is the calendar date of sleep onset. Optional fields are
    None when the source data could not supply them: no meal in the
    lookback window, no environment sample near onset, or no immediately
    preceding consecutive night.
    """

    night_date: date
    sleep: SleepSession
    exercise_day_min: float
    exercise_week_min: float
    eat_sleep_interval_min: float | None
    awake_between_min: float | None
    start_temp_f: float | None
    start_humidity_pct: float | None

    def output_value(self, measure: str) -> float:
        if measure not in OUTPUT_MEASURES:
            raise UnknownNameError(f"unknown output measure {measure!r}")
        return getattr(self.sleep, measure)


@dataclass(frozen=True)
class FeatureRow:
    """The categorical view of one night: 10 inputs and 4 outputs.

    `inputs` always carries all ten event names; a value of None marks an
    input that was unavailable for this night (missing temperature or
    humidity), which excludes the row from experiments using that event.
    """

    night_date: date
    inputs: Mapping[str, str | None]
    outputs: Mapping[str, float]
    output_categories: Mapping[str, str]


@dataclass(frozen=True)
class RuleTuple:
    """One candidate rule: input event -> output measure under a confounder."""

    input_event: str
    output_measure: str
    confounder: str

    def __post_init__(self) -> None:
        if self.input_event not in INPUT_EVENTS:
            raise UnknownNameError(f"unknown input event {self.input_event!r}")
        if self.confounder not in INPUT_EVENTS:
            raise UnknownNameError(f"unknown confounder {self.confounder!r}")
        if self.output_measure not in OUTPUT_MEASURES:
            raise UnknownNameError(
                f"unknown output measure {self.output_measure!r}"
            )
        if self.input_event == self.confounder:
            raise UnknownNameError(
                f"input event and confounder must differ, both {self.input_event!r}"
            )


def _check(violations: list[str], ok: bool, message: str) -> None:
    # NaN comparisons are False, so a NaN field reads as a violation.
    if not ok:
        violations.append(message)


def validate_day_record(rec: DayRecord) -> list[str]:
    """Return all invariant violations of `rec` (empty list means valid).

    Total over any field values the types can represent: violations are
    returned as data, never raised. Besides the record-level rules this
    also checks the embedded session and that every field lies inside the
    domain its default categorization scheme covers.
    """
    v: list[str] = []
    s = rec.sleep
    _check(v, s.wake > s.onset, "wake not after onset")
    _check(v, s.latency_min >= 0, "latency_min negative")
    _check(v, s.awake_min >= 0, "awake_min negative")
    if s.wake > s.onset:
        _check(
            v,
            s.awake_min <= s.in_bed_min,
            "awake_min exceeds in-bed minutes",
        )
    _check(v, s.awakenings_gt5 >= 0, "awakenings_gt5 negative")
    _check(v, 0.0 <= s.efficiency <= 1.0, "efficiency out of [0,1]")
    _check(
        v,
        rec.night_date == s.onset.date(),
        "night_date differs from onset date",
    )
    _check(v, rec.exercise_day_min >= 0, "exercise_day_min negative")
    _check(v, rec.exercise_week_min >= 0, "exercise_week_min negative")
    _check(
        v,
        rec.exercise_week_min >= rec.exercise_day_min,
        "weekly exercise below daily exercise",
    )
    if rec.eat_sleep_interval_min is not None:
        _check(
            v, rec.eat_sleep_interval_min >= 0, "eat_sleep_interval_min negative"
        )
    if rec.awake_between_min is not None:
        _check(v, rec.awake_between_min >= 0, "awake_between_min negative")
    if rec.start_temp_f is not None:
        _check(v, rec.start_temp_f >= 0, "start_temp_f below 0 F")
    if rec.start_humidity_pct is not None:
        _check(
            v,
            0.0 <= rec.start_humidity_pct <= 100.0,
            "start_humidity_pct out of [0,100]",
        )
    return v
