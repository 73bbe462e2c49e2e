"""Tests for parsing, the temporal merge, and the consecutive-run filter.

The fixture files describe three consecutive nights (Mar 1-3) plus one
isolated night (Mar 7); the expected record values below were computed
by hand from those files.
"""

import io
import random
from datetime import date, datetime, timedelta
from pathlib import Path

import pytest

from sleepminer.errors import DuplicateDateError, OverlapError, ParseError
from sleepminer.ingest import (
    MergePolicy,
    filter_consecutive,
    merge_day_records,
    parse_activity_log,
    parse_environment_log,
    parse_meal_log,
    parse_sleep_log,
    read_day_records,
    write_day_records,
)
from sleepminer.model import (
    DayRecord,
    EnvSample,
    MealEvent,
    SleepSession,
    validate_day_record,
)

DATA = Path(__file__).parent / "data"


class TestParsers:
    def test_sleep_fixture(self):
        sessions = parse_sleep_log(DATA / "sleep.csv")
        assert len(sessions) == 4
        assert sessions[0].onset == datetime(2021, 3, 1, 23, 10)
        assert sessions[0].latency_min == 12.0
        assert sessions[0].efficiency == 0.91
        assert all(a.onset < b.onset for a, b in zip(sessions, sessions[1:]))

    def test_header_only_gives_empty_list(self):
        assert parse_sleep_log(DATA / "header_only.csv") == []

    def test_activity_fixture_sorted(self):
        events = parse_activity_log(DATA / "activity.csv")
        assert len(events) == 4
        assert [e.kind for e in events] == ["run", "bike", "walk", "hike"]

    def test_environment_and_meals(self):
        samples = parse_environment_log(DATA / "environment.csv")
        meals = parse_meal_log(DATA / "meals.csv")
        assert len(samples) == 4
        assert samples[0].temperature_f == 64.0
        assert len(meals) == 4

    def test_wake_before_onset_rejected_with_row(self, tmp_path):
        bad = tmp_path / "sleep.csv"
        bad.write_text(
            "onset,wake,latency_min,awake_min,awakenings_gt5,efficiency\n"
            "2021-03-01T23:10,2021-03-01T22:00,12,18,1,0.91\n"
        )
        with pytest.raises(ParseError) as err:
            parse_sleep_log(bad)
        assert err.value.row == 2
        assert "wake" in str(err.value)

    def test_humidity_out_of_bounds_rejected(self, tmp_path):
        bad = tmp_path / "environment.csv"
        bad.write_text(
            "at,temperature_f,humidity_pct\n2021-03-01T23:00,64,140\n"
        )
        with pytest.raises(ParseError) as err:
            parse_environment_log(bad)
        assert err.value.row == 2

    def test_bad_header_rejected(self, tmp_path):
        bad = tmp_path / "sleep.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ParseError):
            parse_sleep_log(bad)

    def test_timezone_aware_rejected(self, tmp_path):
        bad = tmp_path / "meals.csv"
        bad.write_text("at\n2021-03-01T19:30+02:00\n")
        with pytest.raises(ParseError):
            parse_meal_log(bad)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            parse_sleep_log(tmp_path / "nope.csv")

    def test_non_positive_duration_rejected(self, tmp_path):
        bad = tmp_path / "activity.csv"
        bad.write_text("start,duration_min,kind\n2021-03-01T17:00,0,run\n")
        with pytest.raises(ParseError):
            parse_activity_log(bad)


def _fixture_inputs():
    return (
        parse_sleep_log(DATA / "sleep.csv"),
        parse_activity_log(DATA / "activity.csv"),
        parse_environment_log(DATA / "environment.csv"),
        parse_meal_log(DATA / "meals.csv"),
    )


class TestMerge:
    def test_fixture_join(self):
        records = merge_day_records(*_fixture_inputs())
        assert [r.night_date for r in records] == [
            date(2021, 3, 1),
            date(2021, 3, 2),
            date(2021, 3, 3),
            date(2021, 3, 7),
        ]
        mar1, mar2, mar3, mar7 = records

        assert mar1.exercise_day_min == 45.0
        assert mar1.exercise_week_min == 45.0
        assert mar1.eat_sleep_interval_min == 220.0
        assert mar1.start_temp_f == 64.0
        assert mar1.start_humidity_pct == 42.0
        assert mar1.awake_between_min is None

        assert mar2.exercise_day_min == 90.0
        assert mar2.exercise_week_min == 135.0
        assert mar2.eat_sleep_interval_min == 210.0
        # 23:45 sample (15 min away) beats 22:00 (90 min, outside window)
        assert mar2.start_temp_f == 59.0
        assert mar2.start_humidity_pct == 38.0
        # 07:05 wake to 23:30 onset
        assert mar2.awake_between_min == 985.0

        assert mar3.exercise_day_min == 0.0
        assert mar3.exercise_week_min == 135.0
        assert mar3.eat_sleep_interval_min == 590.0
        assert mar3.start_temp_f == 66.0
        assert mar3.awake_between_min == 965.0

        # the hike fell outside the 24h waking window but inside the week
        assert mar7.exercise_day_min == 0.0
        assert mar7.exercise_week_min == 255.0
        assert mar7.eat_sleep_interval_min == 300.0
        assert mar7.start_temp_f is None
        assert mar7.start_humidity_pct is None
        assert mar7.awake_between_min is None

    def test_all_outputs_validate(self):
        for rec in merge_day_records(*_fixture_inputs()):
            assert validate_day_record(rec) == []

    def test_empty_joins(self):
        sessions = parse_sleep_log(DATA / "sleep.csv")[:1]
        rec = merge_day_records(sessions, [], [], [])[0]
        assert rec.exercise_day_min == 0.0
        assert rec.exercise_week_min == 0.0
        assert rec.eat_sleep_interval_min is None
        assert rec.start_temp_f is None
        assert rec.start_humidity_pct is None

    def test_meal_interval_arithmetic(self):
        onset = datetime(2021, 3, 1, 23, 0)
        session = SleepSession(onset, onset + timedelta(hours=8), 10, 10, 0, 0.9)
        rec = merge_day_records(
            [session], [], [], [MealEvent(datetime(2021, 3, 1, 19, 30))]
        )[0]
        assert rec.eat_sleep_interval_min == 210.0

    def test_permutation_invariance(self):
        sessions, activities, env, meals = _fixture_inputs()
        baseline = merge_day_records(sessions, activities, env, meals)
        rng = random.Random(5)
        for _ in range(5):
            s2, a2, e2, m2 = list(sessions), list(activities), list(env), list(meals)
            for lst in (s2, a2, e2, m2):
                rng.shuffle(lst)
            assert merge_day_records(s2, a2, e2, m2) == baseline

    def test_overlap_rejected(self):
        onset = datetime(2021, 3, 1, 23, 0)
        s1 = SleepSession(onset, onset + timedelta(hours=8), 10, 10, 0, 0.9)
        s2 = SleepSession(
            onset + timedelta(hours=7), onset + timedelta(hours=15), 10, 10, 0, 0.9
        )
        with pytest.raises(OverlapError):
            merge_day_records([s1, s2], [], [], [])

    def test_env_window_respected(self):
        onset = datetime(2021, 3, 1, 23, 0)
        session = SleepSession(onset, onset + timedelta(hours=8), 10, 10, 0, 0.9)
        far = EnvSample(onset - timedelta(minutes=45), 60.0, 40.0)
        rec = merge_day_records([session], [], [far], [])[0]
        assert rec.start_temp_f is None
        near = EnvSample(onset + timedelta(minutes=10), 61.0, 41.0)
        rec = merge_day_records([session], [], [far, near], [])[0]
        assert rec.start_temp_f == 61.0

    def test_bad_policy_rejected(self):
        with pytest.raises(ValueError):
            MergePolicy(env_window_min=0)


def _record_on(day: date) -> DayRecord:
    onset = datetime(day.year, day.month, day.day, 23, 0)
    return DayRecord(
        night_date=day,
        sleep=SleepSession(onset, onset + timedelta(hours=8), 10, 10, 0, 0.9),
        exercise_day_min=0.0,
        exercise_week_min=0.0,
        eat_sleep_interval_min=None,
        awake_between_min=960.0,
        start_temp_f=None,
        start_humidity_pct=None,
    )


class TestFilterConsecutive:
    def _dates(self, days):
        return [_record_on(date(2021, 3, d)) for d in days]

    def test_both_runs_kept(self):
        kept = filter_consecutive(self._dates([1, 2, 3, 7, 8]), min_run=2)
        assert [r.night_date.day for r in kept] == [1, 2, 3, 7, 8]

    def test_no_consecutive_pair(self):
        assert filter_consecutive(self._dates([1, 3, 5]), min_run=2) == []

    def test_min_run_four(self):
        kept = filter_consecutive(self._dates([1, 2, 3, 7, 8, 9, 10]), min_run=4)
        assert [r.night_date.day for r in kept] == [7, 8, 9, 10]

    def test_idempotent(self):
        records = self._dates([1, 2, 3, 7, 8, 12])
        once = filter_consecutive(records)
        assert filter_consecutive(once) == once

    def test_duplicate_date_rejected(self):
        with pytest.raises(DuplicateDateError):
            filter_consecutive(self._dates([1, 1, 2]))

    def test_min_run_below_two_rejected(self):
        with pytest.raises(ValueError):
            filter_consecutive(self._dates([1, 2]), min_run=1)


class TestDayRecordsRoundTrip:
    def test_write_then_read_is_identity(self):
        records = filter_consecutive(merge_day_records(*_fixture_inputs()))
        buf = io.StringIO()
        write_day_records(records, buf)
        buf.seek(0)
        assert read_day_records(buf) == records

    def test_absent_fields_written_blank(self):
        sessions = parse_sleep_log(DATA / "sleep.csv")[:1]
        records = merge_day_records(sessions, [], [], [])
        buf = io.StringIO()
        write_day_records(records, buf)
        line = buf.getvalue().splitlines()[1]
        assert line.endswith(",,,,")

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "dayrecords.csv"
        records = merge_day_records(*_fixture_inputs())
        buf = io.StringIO()
        write_day_records(records, buf)
        text = buf.getvalue().replace("0.91", "1.91", 1)
        path.write_text(text)
        with pytest.raises(ParseError):
            read_day_records(path)
