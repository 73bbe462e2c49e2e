"""Threshold schemes that map continuous measures to named event categories.

Each scheme is an ordered set of labeled half-open/closed intervals, plus
optional exact-value specials (e.g. 0 minutes of exercise is its own
"None" category rather than part of a range). Category order matters: the
first listed category of an input's scheme is the base category that
stage-2 effect estimation compares against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import model
from .errors import DomainError, SchemeError, UnknownNameError
from .model import DayRecord, FeatureRow

INF = math.inf


@dataclass(frozen=True)
class Bin:
    """One labeled interval; each side is independently open or closed."""

    lower: float
    upper: float
    lower_closed: bool
    upper_closed: bool
    label: str

    def contains(self, value: float) -> bool:
        above = value >= self.lower if self.lower_closed else value > self.lower
        below = value <= self.upper if self.upper_closed else value < self.upper
        return above and below


@dataclass(frozen=True)
class SpecialValue:
    """An exact value with its own category (a degenerate interval)."""

    value: float
    label: str


@dataclass(frozen=True)
class Scheme:
    """A named, ordered categorization of one measure or lifestyle event."""

    name: str
    measure: str
    bins: tuple[Bin, ...]
    specials: tuple[SpecialValue, ...] = ()

    def __post_init__(self) -> None:
        _validate_scheme(self)

    @property
    def categories(self) -> tuple[str, ...]:
        """Category labels in listed order: specials first, then bins."""
        return tuple(s.label for s in self.specials) + tuple(
            b.label for b in self.bins
        )

    @property
    def base_category(self) -> str:
        return self.categories[0]

    @property
    def domain(self) -> tuple[float, float]:
        """Smallest interval containing all bins and specials."""
        lo = min(
            [b.lower for b in self.bins] + [s.value for s in self.specials]
        )
        hi = max(
            [b.upper for b in self.bins] + [s.value for s in self.specials]
        )
        return lo, hi


def _validate_scheme(scheme: Scheme) -> None:
    if not scheme.bins:
        raise SchemeError(f"scheme {scheme.name!r} has no bins")
    labels = scheme.categories
    if len(set(labels)) != len(labels):
        raise SchemeError(f"scheme {scheme.name!r} has duplicate labels")
    for b in scheme.bins:
        if not b.lower < b.upper:
            raise SchemeError(
                f"scheme {scheme.name!r}: bin {b.label!r} has lower >= upper"
            )
    special_points = {s.value for s in scheme.specials}
    for s in scheme.specials:
        for b in scheme.bins:
            if b.contains(s.value):
                raise SchemeError(
                    f"scheme {scheme.name!r}: special {s.value} lies inside "
                    f"bin {b.label!r}"
                )
    ordered = sorted(scheme.bins, key=lambda b: (b.lower, b.upper))
    for left, right in zip(ordered, ordered[1:]):
        if right.lower < left.upper or (
            right.lower == left.upper and right.lower_closed and left.upper_closed
        ):
            raise SchemeError(
                f"scheme {scheme.name!r}: bins {left.label!r} and "
                f"{right.label!r} overlap"
            )
        gap_is_point = (
            right.lower == left.upper
            and not right.lower_closed
            and not left.upper_closed
        )
        touching = right.lower == left.upper and (
            right.lower_closed or left.upper_closed
        )
        if not touching and not (gap_is_point and left.upper in special_points):
            if right.lower > left.upper or gap_is_point:
                raise SchemeError(
                    f"scheme {scheme.name!r}: gap between bins "
                    f"{left.label!r} and {right.label!r}"
                )


def categorize(value: float, scheme: Scheme) -> str:
    """Return the label of the unique special or bin containing `value`."""
    for s in scheme.specials:
        if value == s.value:
            return s.label
    for b in scheme.bins:
        if b.contains(value):
            return b.label
    raise DomainError(
        f"value {value!r} outside the domain of scheme {scheme.name!r}"
    )


def _bins(*rows: tuple[float, float, bool, bool, str]) -> tuple[Bin, ...]:
    return tuple(Bin(*row) for row in rows)


def _default_scheme_table() -> dict[str, Scheme]:
    def mk(measure, bins, specials=()):
        return Scheme(
            name=f"{measure}-default",
            measure=measure,
            bins=bins,
            specials=tuple(SpecialValue(*s) for s in specials),
        )

    return {
        "latency_min": mk(
            "latency_min",
            _bins(
                (0.0, 15.0, True, True, "Good"),
                (15.0, 30.0, False, True, "Average"),
                (30.0, INF, False, False, "Poor"),
            ),
        ),
        "awake_min": mk(
            "awake_min",
            _bins(
                (0.0, 20.0, True, True, "Good"),
                (20.0, INF, False, False, "Poor"),
            ),
        ),
        "awakenings_gt5": mk(
            "awakenings_gt5",
            _bins(
                (0.0, 1.0, True, True, "Good"),
                (1.0, INF, False, False, "Poor"),
            ),
        ),
        "efficiency": mk(
            "efficiency",
            _bins(
                (0.85, 1.0, True, True, "Good"),
                (0.0, 0.85, True, False, "Poor"),
            ),
        ),
        "exercise_day": mk(
            "exercise_day",
            _bins(
                (0.0, 50.0, False, True, "Poor"),
                (50.0, 150.0, False, True, "Average"),
                (150.0, INF, False, False, "Good"),
            ),
            specials=((0.0, "None"),),
        ),
        "exercise_week": mk(
            "exercise_week",
            _bins(
                (0.0, 150.0, True, True, "Poor"),
                (150.0, 300.0, False, True, "Average"),
                (300.0, INF, False, False, "Good"),
            ),
        ),
        "eat_sleep_interval": mk(
            "eat_sleep_interval",
            _bins(
                (0.0, 180.0, False, True, "Poor"),
                (180.0, INF, False, False, "Good"),
            ),
            specials=((0.0, "Missing"),),
        ),
        "awake_between": mk(
            "awake_between",
            _bins(
                (0.0, 900.0, True, True, "Poor"),
                (900.0, 1020.0, False, True, "Average"),
                (1020.0, INF, False, False, "Good"),
            ),
        ),
        "start_temp": mk(
            "start_temp",
            _bins(
                (0.0, 60.0, True, True, "Cold"),
                (60.0, 67.0, False, True, "Comfortable"),
                (67.0, INF, False, False, "Warm"),
            ),
        ),
        "start_humidity": mk(
            "start_humidity",
            _bins(
                (0.0, 30.0, True, True, "Low"),
                (30.0, 50.0, False, True, "Ideal"),
                (50.0, 100.0, False, True, "High"),
            ),
        ),
    }


@dataclass(frozen=True)
class SchemeSet:
    """The ten schemes of a configuration, keyed by measure/event name.

    Output measures are keyed directly; previous-night inputs resolve to
    the scheme of the measure they lag.
    """

    schemes: Mapping[str, Scheme]

    def __post_init__(self) -> None:
        missing = set(SCHEME_NAMES) - set(self.schemes)
        if missing:
            raise SchemeError(f"missing schemes: {sorted(missing)}")

    def for_output(self, measure: str) -> Scheme:
        if measure not in model.OUTPUT_MEASURES:
            raise UnknownNameError(f"unknown output measure {measure!r}")
        return self.schemes[measure]

    def for_input(self, event: str) -> Scheme:
        if event in model.PREV_NIGHT_SOURCE:
            return self.schemes[model.PREV_NIGHT_SOURCE[event]]
        if event in model.LIFESTYLE_EVENTS:
            return self.schemes[event]
        raise UnknownNameError(f"unknown input event {event!r}")

    def input_categories(self, event: str) -> tuple[str, ...]:
        return self.for_input(event).categories

    def base_category(self, event: str) -> str:
        return self.for_input(event).base_category


# Scheme keys: the 4 output measures and the 6 lifestyle events.
SCHEME_NAMES: tuple[str, ...] = model.OUTPUT_MEASURES + model.LIFESTYLE_EVENTS


def default_schemes() -> SchemeSet:
    """The ten built-in schemes (sleep-quality and lifestyle thresholds)."""
    return SchemeSet(_default_scheme_table())


_SIDE_FLAGS = {"lc": True, "lo": False, "rc": True, "ro": False}


def _bin_from_config(name: str, row: Sequence) -> Bin:
    if len(row) != 5:
        raise SchemeError(
            f"scheme {name!r}: bin row must be [lo, hi, lc|lo, rc|ro, label]"
        )
    lo, hi, lflag, rflag, label = row
    if lflag not in ("lc", "lo") or rflag not in ("rc", "ro"):
        raise SchemeError(
            f"scheme {name!r}: side flags must be lc/lo and rc/ro, got "
            f"{lflag!r}/{rflag!r}"
        )
    return Bin(
        float(lo), float(hi), _SIDE_FLAGS[lflag], _SIDE_FLAGS[rflag], str(label)
    )


def load_schemes(path) -> SchemeSet:
    """Load scheme overrides from a TOML file; omitted schemes stay default.

    Syntax: one `[scheme.<name>]` section per override, with
    `bins = [[lo, hi, "lc|lo", "rc|ro", "Label"], ...]` and optional
    `special = [[value, "Label"], ...]`. Unbounded sides use `inf`.
    """
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SchemeError(f"{path}: {exc}") from exc
    table = dict(_default_scheme_table())
    sections = doc.get("scheme", {})
    if not isinstance(sections, dict):
        raise SchemeError(f"{path}: [scheme.<name>] sections expected")
    for name, body in sections.items():
        if name not in SCHEME_NAMES:
            raise SchemeError(f"{path}: unknown scheme name {name!r}")
        if "bins" not in body:
            raise SchemeError(f"{path}: scheme {name!r} lacks bins")
        bins = tuple(_bin_from_config(name, row) for row in body["bins"])
        specials = tuple(
            SpecialValue(float(v), str(label))
            for v, label in body.get("special", [])
        )
        table[name] = Scheme(
            name=f"{name}-config", measure=name, bins=bins, specials=specials
        )
    return SchemeSet(table)


def derive_features(
    records: Sequence[DayRecord], schemes: SchemeSet | None = None
) -> list[FeatureRow]:
    """Build one feature row per night that has a preceding consecutive night.

    The first night of each consecutive run only supplies lagged quality
    categories, so a run of length L yields L-1 rows. Missing temperature
    or humidity leaves that input marked unavailable (None) rather than
    dropping the row.
    """
    schemes = schemes or default_schemes()
    rows: list[FeatureRow] = []
    ordered = sorted(records, key=lambda r: r.night_date)
    for prev, rec in zip(ordered, ordered[1:]):
        if (rec.night_date - prev.night_date).days != 1:
            continue
        outputs = {m: rec.output_value(m) for m in model.OUTPUT_MEASURES}
        output_categories = {
            m: categorize(outputs[m], schemes.for_output(m))
            for m in model.OUTPUT_MEASURES
        }
        inputs: dict[str, str | None] = {}
        for event, source in model.PREV_NIGHT_SOURCE.items():
            inputs[event] = categorize(
                prev.output_value(source), schemes.for_output(source)
            )
        inputs["exercise_day"] = categorize(
            rec.exercise_day_min, schemes.for_input("exercise_day")
        )
        inputs["exercise_week"] = categorize(
            rec.exercise_week_min, schemes.for_input("exercise_week")
        )
        eat_scheme = schemes.for_input("eat_sleep_interval")
        if rec.eat_sleep_interval_min is None:
            inputs["eat_sleep_interval"] = categorize(0.0, eat_scheme)
        else:
            inputs["eat_sleep_interval"] = categorize(
                rec.eat_sleep_interval_min, eat_scheme
            )
        inputs["awake_between"] = categorize(
            rec.awake_between_min, schemes.for_input("awake_between")
        )
        inputs["start_temp"] = (
            None
            if rec.start_temp_f is None
            else categorize(rec.start_temp_f, schemes.for_input("start_temp"))
        )
        inputs["start_humidity"] = (
            None
            if rec.start_humidity_pct is None
            else categorize(
                rec.start_humidity_pct, schemes.for_input("start_humidity")
            )
        )
        rows.append(
            FeatureRow(
                night_date=rec.night_date,
                inputs=inputs,
                outputs=outputs,
                output_categories=output_categories,
            )
        )
    return rows
