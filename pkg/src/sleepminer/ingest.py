"""Parsing of the four source logs and their temporal merge into day records.

All four inputs are UTF-8 CSV with a header row and ISO-8601 local
timestamps. Parsers reject malformed rows with their row number; the
merge then joins everything onto sleep sessions, one record per night.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Iterable, Sequence, TextIO

from .errors import DuplicateDateError, OverlapError, ParseError
from .model import (
    ActivityEvent,
    DayRecord,
    EnvSample,
    MealEvent,
    SleepSession,
    validate_day_record,
)

SLEEP_COLUMNS = ("onset", "wake", "latency_min", "awake_min", "awakenings_gt5", "efficiency")
ACTIVITY_COLUMNS = ("start", "duration_min", "kind")
ENVIRONMENT_COLUMNS = ("at", "temperature_f", "humidity_pct")
MEAL_COLUMNS = ("at",)

DAYRECORD_COLUMNS = (
    "night_date",
    "onset",
    "wake",
    "latency_min",
    "awake_min",
    "awakenings_gt5",
    "efficiency",
    "exercise_day_min",
    "exercise_week_min",
    "eat_sleep_interval_min",
    "awake_between_min",
    "start_temp_f",
    "start_humidity_pct",
)


@dataclass(frozen=True)
class MergePolicy:
    """Tunable windows for the temporal joins.

    env_window_min bounds how stale a "starting" temperature/humidity
    sample may be relative to sleep onset; meal_lookback_h bounds which
    meals can define the eating-to-sleep interval.
    """

    env_window_min: float = 30.0
    meal_lookback_h: float = 24.0
    week_window_days: int = 7

    def __post_init__(self) -> None:
        if self.env_window_min <= 0:
            raise ValueError("env_window_min must be positive")
        if self.meal_lookback_h <= 0:
            raise ValueError("meal_lookback_h must be positive")
        if self.week_window_days <= 0:
            raise ValueError("week_window_days must be positive")


def _parse_timestamp(path, row_no: int, column: str, raw: str) -> datetime:
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ParseError(path, row_no, column, f"bad timestamp {raw!r}") from exc
    if ts.tzinfo is not None:
        raise ParseError(
            path, row_no, column, "timezone-aware timestamps are not supported"
        )
    return ts


def _parse_float(path, row_no: int, column: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise ParseError(path, row_no, column, f"bad number {raw!r}") from exc
    if math.isnan(value) or math.isinf(value):
        raise ParseError(path, row_no, column, f"non-finite number {raw!r}")
    return value


def _read_rows(path, expected: tuple[str, ...]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, expected[0], "missing header row") from None
        if tuple(h.strip() for h in header) != expected:
            raise ParseError(
                path, 1, header[0] if header else "", f"expected header {','.join(expected)}"
            )
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(expected):
                raise ParseError(
                    path, row_no, expected[0], f"expected {len(expected)} fields, got {len(row)}"
                )
            yield row_no, [cell.strip() for cell in row]


def parse_sleep_log(path) -> list[SleepSession]:
    """Parse sleep.csv into sessions sorted by onset."""
    sessions = []
    for row_no, row in _read_rows(path, SLEEP_COLUMNS):
        onset = _parse_timestamp(path, row_no, "onset", row[0])
        wake = _parse_timestamp(path, row_no, "wake", row[1])
        latency = _parse_float(path, row_no, "latency_min", row[2])
        awake = _parse_float(path, row_no, "awake_min", row[3])
        awakenings = _parse_float(path, row_no, "awakenings_gt5", row[4])
        efficiency = _parse_float(path, row_no, "efficiency", row[5])
        if wake <= onset:
            raise ParseError(path, row_no, "wake", "wake not after onset")
        if latency < 0:
            raise ParseError(path, row_no, "latency_min", "negative latency")
        if awake < 0:
            raise ParseError(path, row_no, "awake_min", "negative awake minutes")
        in_bed = (wake - onset).total_seconds() / 60.0
        if awake > in_bed:
            raise ParseError(
                path, row_no, "awake_min", "awake minutes exceed in-bed minutes"
            )
        if awakenings < 0:
            raise ParseError(path, row_no, "awakenings_gt5", "negative count")
        if not 0.0 <= efficiency <= 1.0:
            raise ParseError(path, row_no, "efficiency", "efficiency out of [0,1]")
        sessions.append(
            SleepSession(onset, wake, latency, awake, awakenings, efficiency)
        )
    sessions.sort(key=lambda s: (s.onset, s.wake))
    return sessions


def parse_activity_log(path) -> list[ActivityEvent]:
    """Parse activity.csv into events sorted by start time."""
    events = []
    for row_no, row in _read_rows(path, ACTIVITY_COLUMNS):
        start = _parse_timestamp(path, row_no, "start", row[0])
        duration = _parse_float(path, row_no, "duration_min", row[1])
        if duration <= 0:
            raise ParseError(path, row_no, "duration_min", "duration must be positive")
        events.append(ActivityEvent(start, duration, row[2]))
    events.sort(key=lambda e: (e.start, e.duration_min, e.kind))
    return events


def parse_environment_log(path) -> list[EnvSample]:
    """Parse environment.csv into samples sorted by time."""
    samples = []
    for row_no, row in _read_rows(path, ENVIRONMENT_COLUMNS):
        at = _parse_timestamp(path, row_no, "at", row[0])
        temp = _parse_float(path, row_no, "temperature_f", row[1])
        humidity = _parse_float(path, row_no, "humidity_pct", row[2])
        if not 0.0 <= humidity <= 100.0:
            raise ParseError(path, row_no, "humidity_pct", "humidity out of [0,100]")
        samples.append(EnvSample(at, temp, humidity))
    samples.sort(key=lambda s: (s.at, s.temperature_f, s.humidity_pct))
    return samples


def parse_meal_log(path) -> list[MealEvent]:
    """Parse meals.csv into events sorted by time."""
    meals = []
    for row_no, row in _read_rows(path, MEAL_COLUMNS):
        meals.append(MealEvent(_parse_timestamp(path, row_no, "at", row[0])))
    meals.sort(key=lambda m: m.at)
    return meals


def _minutes(delta: timedelta) -> float:
    return delta.total_seconds() / 60.0


def merge_day_records(
    sessions: Sequence[SleepSession],
    activities: Sequence[ActivityEvent],
    env: Sequence[EnvSample],
    meals: Sequence[MealEvent],
    policy: MergePolicy = MergePolicy(),
) -> list[DayRecord]:
    """Join lifestyle streams onto sleep sessions, one record per session.

    The waking period of a session runs from the previous wake (capped at
    24 hours before onset; the first session always uses the 24-hour
    lookback) up to onset. Daily exercise sums activity durations started
    in that period; weekly exercise sums the 7 calendar days ending on
    the night date. The eating interval uses the latest meal within the
    lookback, and starting temperature/humidity come from the nearest
    environment sample within the window (earlier sample wins ties).
    """
    ordered = sorted(sessions, key=lambda s: (s.onset, s.wake))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.onset < prev.wake:
            raise OverlapError(
                f"sessions starting {prev.onset} and {cur.onset} overlap"
            )
    activities = sorted(activities, key=lambda e: (e.start, e.duration_min, e.kind))
    env = sorted(env, key=lambda s: (s.at, s.temperature_f, s.humidity_pct))
    meals = sorted(meals, key=lambda m: m.at)

    records = []
    prev_session: SleepSession | None = None
    for session in ordered:
        onset = session.onset
        night_date = onset.date()

        waking_start = onset - timedelta(hours=24)
        if prev_session is not None and prev_session.wake > waking_start:
            waking_start = prev_session.wake
        exercise_day = math.fsum(
            a.duration_min for a in activities if waking_start <= a.start < onset
        )

        week_start = night_date - timedelta(days=policy.week_window_days - 1)
        exercise_week = math.fsum(
            a.duration_min
            for a in activities
            if week_start <= a.start.date() <= night_date
        )

        lookback = onset - timedelta(hours=policy.meal_lookback_h)
        eaten = [m.at for m in meals if lookback <= m.at <= onset]
        eat_interval = _minutes(onset - max(eaten)) if eaten else None

        nearest: EnvSample | None = None
        nearest_gap: float | None = None
        for sample in env:
            gap = abs(_minutes(sample.at - onset))
            if gap <= policy.env_window_min and (
                nearest_gap is None or gap < nearest_gap
            ):
                nearest, nearest_gap = sample, gap
        start_temp = nearest.temperature_f if nearest else None
        start_humidity = nearest.humidity_pct if nearest else None

        awake_between = None
        if (
            prev_session is not None
            and prev_session.onset.date() == night_date - timedelta(days=1)
        ):
            awake_between = _minutes(onset - prev_session.wake)

        records.append(
            DayRecord(
                night_date=night_date,
                sleep=session,
                exercise_day_min=exercise_day,
                exercise_week_min=exercise_week,
                eat_sleep_interval_min=eat_interval,
                awake_between_min=awake_between,
                start_temp_f=start_temp,
                start_humidity_pct=start_humidity,
            )
        )
        prev_session = session
    return records


def filter_consecutive(
    records: Sequence[DayRecord], min_run: int = 2
) -> list[DayRecord]:
    """Keep only maximal runs of consecutive night dates of length >= min_run."""
    if min_run < 2:
        raise ValueError("min_run must be at least 2")
    ordered = sorted(records, key=lambda r: r.night_date)
    for left, right in zip(ordered, ordered[1:]):
        if left.night_date == right.night_date:
            raise DuplicateDateError(
                f"two records share night date {left.night_date}"
            )
    kept: list[DayRecord] = []
    run: list[DayRecord] = []
    for rec in ordered:
        if run and (rec.night_date - run[-1].night_date).days == 1:
            run.append(rec)
        else:
            if len(run) >= min_run:
                kept.extend(run)
            run = [rec]
    if len(run) >= min_run:
        kept.extend(run)
    return kept


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, datetime):
        return value.isoformat()
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def write_day_records(records: Iterable[DayRecord], out: TextIO) -> None:
    """Write records as dayrecords.csv (fixed column order, blank for absent)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DAYRECORD_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                _format_value(v)
                for v in (
                    rec.night_date,
                    rec.sleep.onset,
                    rec.sleep.wake,
                    rec.sleep.latency_min,
                    rec.sleep.awake_min,
                    rec.sleep.awakenings_gt5,
                    rec.sleep.efficiency,
                    rec.exercise_day_min,
                    rec.exercise_week_min,
                    rec.eat_sleep_interval_min,
                    rec.awake_between_min,
                    rec.start_temp_f,
                    rec.start_humidity_pct,
                )
            ]
        )


def save_day_records(records: Iterable[DayRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_day_records(records, fh)


def read_day_records(source) -> list[DayRecord]:
    """Read dayrecords.csv back into records (path or open text stream)."""
    if hasattr(source, "read"):
        return _read_day_records(source, getattr(source, "name", "<stream>"))
    with open(source, newline="", encoding="utf-8") as fh:
        return _read_day_records(fh, source)


def _read_day_records(fh: TextIO, path) -> list[DayRecord]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(path, 1, DAYRECORD_COLUMNS[0], "missing header row") from None
    if tuple(h.strip() for h in header) != DAYRECORD_COLUMNS:
        raise ParseError(
            path, 1, header[0] if header else "",
            f"expected header {','.join(DAYRECORD_COLUMNS)}",
        )
    records = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(DAYRECORD_COLUMNS):
            raise ParseError(
                path, row_no, DAYRECORD_COLUMNS[0],
                f"expected {len(DAYRECORD_COLUMNS)} fields, got {len(row)}",
            )
        cells = [cell.strip() for cell in row]
        try:
            night_date = date.fromisoformat(cells[0])
        except ValueError as exc:
            raise ParseError(path, row_no, "night_date", f"bad date {cells[0]!r}") from exc
        onset = _parse_timestamp(path, row_no, "onset", cells[1])
        wake = _parse_timestamp(path, row_no, "wake", cells[2])
        required = [
            _parse_float(path, row_no, DAYRECORD_COLUMNS[i], cells[i])
            for i in range(3, 9)
        ]
        optional = [
            None
            if not cells[i]
            else _parse_float(path, row_no, DAYRECORD_COLUMNS[i], cells[i])
            for i in range(9, 13)
        ]
        rec = DayRecord(
            night_date=night_date,
            sleep=SleepSession(onset, wake, *required[:4]),
            exercise_day_min=required[4],
            exercise_week_min=required[5],
            eat_sleep_interval_min=optional[0],
            awake_between_min=optional[1],
            start_temp_f=optional[2],
            start_humidity_pct=optional[3],
        )
        violations = validate_day_record(rec)
        if violations:
            raise ParseError(path, row_no, "night_date", "; ".join(violations))
        records.append(rec)
    return records
