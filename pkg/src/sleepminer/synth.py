"""Synthetic day-record generator with planted effects and confounders.

Produces fully reproducible runs of consecutive nights whose lifestyle
categories follow configurable marginals and whose sleep outputs follow
an additive model: baseline + planted input effects + confounder shifts
+ AR(1) carryover noise + gaussian noise, clamped to each output's
domain. Planted deltas act on the continuous outputs, so they are exact
ground truth for the effect estimates the mining stage should recover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from typing import Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import model
from .discretize import Scheme, SchemeSet, categorize, default_schemes
from .errors import GeneratorSpecError
from .model import DayRecord, SleepSession

DEFAULT_START_DATE = date(2021, 1, 1)

# Mean overshoot used for the open-ended top bin of each sampled field.
_TAIL_SCALE = {
    "exercise_day": 60.0,
    "exercise_week": 120.0,
    "eat_sleep_interval": 120.0,
    "awake_between": 30.0,
    "start_temp": 4.0,
}

# Nightly schedule: in bed 23:00 to 07:00. Sampled awake-between values
# describe the night's waking-period length independently of these
# anchors (see README).
_ONSET_TIME = time(23, 0)
_IN_BED_MIN = 480.0

DEFAULT_BASELINE_MEANS = {
    "latency_min": 18.0,
    "awake_min": 25.0,
    "awakenings_gt5": 1.5,
    "efficiency": 0.90,
}

# Scaled so that clamping to each output's domain stays rare (< 1%).
DEFAULT_NOISE_SD = {
    "latency_min": 8.0,
    "awake_min": 8.0,
    "awakenings_gt5": 0.6,
    "efficiency": 0.04,
}

DEFAULT_INPUT_MARGINALS: dict[str, dict[str, float]] = {
    "exercise_day": {"None": 0.30, "Poor": 0.25, "Average": 0.25, "Good": 0.20},
    "exercise_week": {"Poor": 0.25, "Average": 0.40, "Good": 0.35},
    "eat_sleep_interval": {"Missing": 0.10, "Poor": 0.45, "Good": 0.45},
    "awake_between": {"Poor": 0.30, "Average": 0.40, "Good": 0.30},
    "start_temp": {"Cold": 0.25, "Comfortable": 0.45, "Warm": 0.30},
    "start_humidity": {"Low": 0.25, "Ideal": 0.45, "High": 0.30},
}


@dataclass(frozen=True)
class PlantedEffect:
    """Additive shift applied when an input event lands in a category."""

    input_event: str
    input_category: str
    output_measure: str
    delta: float


@dataclass(frozen=True)
class ConfounderLink:
    """Additive shift tying a confounder category to an output measure."""

    confounder_event: str
    confounder_category: str
    output_measure: str
    delta: float


@dataclass(frozen=True)
class GeneratorSpec:
    """Everything needed for one reproducible synthetic dataset."""

    n_days: int
    seed: int
    baseline_means: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_BASELINE_MEANS)
    )
    noise_sd: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_NOISE_SD)
    )
    planted_effects: tuple[PlantedEffect, ...] = ()
    confounder_links: tuple[ConfounderLink, ...] = ()
    carryover: float = 0.0
    input_marginals: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: {
            k: dict(v) for k, v in DEFAULT_INPUT_MARGINALS.items()
        }
    )
    start_date: date = DEFAULT_START_DATE


@dataclass(frozen=True)
class GenerationResult:
    """Generated records plus how often outputs had to be clamped."""

    records: list[DayRecord]
    clamped: int
    total_outputs: int

    @property
    def clamp_rate(self) -> float:
        return self.clamped / self.total_outputs if self.total_outputs else 0.0


def default_generator_spec(n_days: int = 365, seed: int = 0, **overrides) -> GeneratorSpec:
    """A sensible all-null spec; tweak via keyword overrides."""
    return GeneratorSpec(n_days=n_days, seed=seed, **overrides)


def _validate_spec(spec: GeneratorSpec, schemes: SchemeSet) -> None:
    if spec.n_days < 2:
        raise GeneratorSpecError("n_days must be at least 2")
    if not 0.0 <= spec.carryover < 1.0:
        raise GeneratorSpecError("carryover must lie in [0, 1)")
    for m in model.OUTPUT_MEASURES:
        if m not in spec.baseline_means:
            raise GeneratorSpecError(f"baseline_means missing {m!r}")
        if m not in spec.noise_sd:
            raise GeneratorSpecError(f"noise_sd missing {m!r}")
        if not spec.noise_sd[m] > 0:
            raise GeneratorSpecError(f"noise_sd[{m!r}] must be positive")
    for extra in set(spec.baseline_means) - set(model.OUTPUT_MEASURES):
        raise GeneratorSpecError(f"baseline_means has unknown measure {extra!r}")
    for extra in set(spec.noise_sd) - set(model.OUTPUT_MEASURES):
        raise GeneratorSpecError(f"noise_sd has unknown measure {extra!r}")
    for event, marginals in spec.input_marginals.items():
        if event not in model.LIFESTYLE_EVENTS:
            raise GeneratorSpecError(
                f"input_marginals: {event!r} is not a samplable lifestyle event"
            )
        categories = set(schemes.input_categories(event))
        for category, prob in marginals.items():
            if category not in categories:
                raise GeneratorSpecError(
                    f"input_marginals[{event!r}]: unknown category {category!r}"
                )
            if prob < 0:
                raise GeneratorSpecError(
                    f"input_marginals[{event!r}][{category!r}] is negative"
                )
        if abs(math.fsum(marginals.values()) - 1.0) > 1e-9:
            raise GeneratorSpecError(
                f"input_marginals[{event!r}] must sum to 1"
            )
    for event in model.LIFESTYLE_EVENTS:
        if event not in spec.input_marginals:
            raise GeneratorSpecError(f"input_marginals missing {event!r}")
    for eff in spec.planted_effects:
        _validate_link(
            schemes, eff.input_event, eff.input_category, eff.output_measure
        )
    for link in spec.confounder_links:
        _validate_link(
            schemes,
            link.confounder_event,
            link.confounder_category,
            link.output_measure,
        )


def _validate_link(
    schemes: SchemeSet, event: str, category: str, measure: str
) -> None:
    if event not in model.INPUT_EVENTS:
        raise GeneratorSpecError(f"unknown input event {event!r}")
    if measure not in model.OUTPUT_MEASURES:
        raise GeneratorSpecError(f"unknown output measure {measure!r}")
    if category not in schemes.input_categories(event):
        raise GeneratorSpecError(
            f"{category!r} is not a category of {event!r}"
        )


def _sample_category(rng: np.random.Generator, marginals: Mapping[str, float]) -> str:
    labels = list(marginals)
    probs = np.array([marginals[c] for c in labels], dtype=float)
    probs = probs / probs.sum()
    return labels[int(rng.choice(len(labels), p=probs))]


def _sample_in_bin(rng: np.random.Generator, scheme: Scheme, category: str, tail_scale: float) -> float:
    for s in scheme.specials:
        if s.label == category:
            return s.value
    for b in scheme.bins:
        if b.label == category:
            if math.isinf(b.upper):
                return b.lower + float(rng.exponential(tail_scale))
            return float(rng.uniform(b.lower, b.upper))
    raise GeneratorSpecError(
        f"{category!r} is not a category of scheme {scheme.name!r}"
    )


_OUTPUT_CLAMP = {
    "latency_min": (0.0, math.inf),
    "awake_min": (0.0, _IN_BED_MIN),
    "awakenings_gt5": (0.0, math.inf),
    "efficiency": (0.0, 1.0),
}


def generate_detailed(spec: GeneratorSpec) -> GenerationResult:
    """Generate consecutive-night records plus clamping statistics."""
    schemes = default_schemes()
    _validate_spec(spec, schemes)
    rng = np.random.default_rng(spec.seed)

    records: list[DayRecord] = []
    prev_output_cats: dict[str, str] | None = None
    noise_state = {m: 0.0 for m in model.OUTPUT_MEASURES}
    clamped = 0

    for day in range(spec.n_days):
        night = spec.start_date + timedelta(days=day)

        lifestyle_cats = {
            event: _sample_category(rng, spec.input_marginals[event])
            for event in model.LIFESTYLE_EVENTS
        }
        values = {
            event: _sample_in_bin(
                rng,
                schemes.for_input(event),
                lifestyle_cats[event],
                _TAIL_SCALE.get(event, 30.0),
            )
            for event in model.LIFESTYLE_EVENTS
        }
        # Weekly exercise can never undercut the day's exercise.
        if values["exercise_week"] < values["exercise_day"]:
            values["exercise_week"] = values["exercise_day"]
        eat_interval = (
            None
            if lifestyle_cats["eat_sleep_interval"] == "Missing"
            else values["eat_sleep_interval"]
        )

        active_cats: dict[str, str | None] = dict(lifestyle_cats)
        for event, source in model.PREV_NIGHT_SOURCE.items():
            active_cats[event] = (
                prev_output_cats[source] if prev_output_cats else None
            )

        outputs: dict[str, float] = {}
        for measure in model.OUTPUT_MEASURES:
            shift = 0.0
            for eff in spec.planted_effects:
                if (
                    eff.output_measure == measure
                    and active_cats.get(eff.input_event) == eff.input_category
                ):
                    shift += eff.delta
            for link in spec.confounder_links:
                if (
                    link.output_measure == measure
                    and active_cats.get(link.confounder_event)
                    == link.confounder_category
                ):
                    shift += link.delta
            eps = spec.carryover * noise_state[measure] + float(
                rng.normal(0.0, spec.noise_sd[measure])
            )
            noise_state[measure] = eps
            value = spec.baseline_means[measure] + shift + eps
            lo, hi = _OUTPUT_CLAMP[measure]
            clipped = min(max(value, lo), hi)
            if clipped != value:
                clamped += 1
            outputs[measure] = clipped

        onset = datetime.combine(night, _ONSET_TIME)
        wake = onset + timedelta(minutes=_IN_BED_MIN)
        session = SleepSession(
            onset=onset,
            wake=wake,
            latency_min=outputs["latency_min"],
            awake_min=outputs["awake_min"],
            awakenings_gt5=outputs["awakenings_gt5"],
            efficiency=outputs["efficiency"],
        )
        records.append(
            DayRecord(
                night_date=night,
                sleep=session,
                exercise_day_min=values["exercise_day"],
                exercise_week_min=values["exercise_week"],
                eat_sleep_interval_min=eat_interval,
                awake_between_min=None if day == 0 else values["awake_between"],
                start_temp_f=values["start_temp"],
                start_humidity_pct=values["start_humidity"],
            )
        )
        prev_output_cats = {
            m: categorize(outputs[m], schemes.for_output(m))
            for m in model.OUTPUT_MEASURES
        }

    return GenerationResult(
        records=records,
        clamped=clamped,
        total_outputs=len(model.OUTPUT_MEASURES) * spec.n_days,
    )


def generate(spec: GeneratorSpec) -> list[DayRecord]:
    """Generate the day records for `spec` (see generate_detailed)."""
    return generate_detailed(spec).records


def load_generator_spec(path, **overrides) -> GeneratorSpec:
    """Load a GeneratorSpec from a TOML file.

    Top-level keys mirror the GeneratorSpec fields; planted_effects and
    confounder_links are arrays of tables. Keyword overrides (e.g. seed,
    n_days from the command line) replace file values.
    """
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise GeneratorSpecError(f"{path}: {exc}") from exc
    known = {
        "n_days",
        "seed",
        "baseline_means",
        "noise_sd",
        "planted_effects",
        "confounder_links",
        "carryover",
        "input_marginals",
        "start_date",
    }
    unknown = set(doc) - known
    if unknown:
        raise GeneratorSpecError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs: dict = {}
    kwargs["n_days"] = int(doc.get("n_days", 365))
    kwargs["seed"] = int(doc.get("seed", 0))
    if "carryover" in doc:
        kwargs["carryover"] = float(doc["carryover"])
    if "baseline_means" in doc:
        means = dict(DEFAULT_BASELINE_MEANS)
        means.update({k: float(v) for k, v in doc["baseline_means"].items()})
        kwargs["baseline_means"] = means
    if "noise_sd" in doc:
        sds = dict(DEFAULT_NOISE_SD)
        sds.update({k: float(v) for k, v in doc["noise_sd"].items()})
        kwargs["noise_sd"] = sds
    if "input_marginals" in doc:
        marginals = {k: dict(v) for k, v in DEFAULT_INPUT_MARGINALS.items()}
        for event, table in doc["input_marginals"].items():
            marginals[event] = {k: float(v) for k, v in table.items()}
        kwargs["input_marginals"] = marginals
    try:
        if "planted_effects" in doc:
            kwargs["planted_effects"] = tuple(
                PlantedEffect(
                    row["input_event"],
                    row["input_category"],
                    row["output_measure"],
                    float(row["delta"]),
                )
                for row in doc["planted_effects"]
            )
        if "confounder_links" in doc:
            kwargs["confounder_links"] = tuple(
                ConfounderLink(
                    row["confounder_event"],
                    row["confounder_category"],
                    row["output_measure"],
                    float(row["delta"]),
                )
                for row in doc["confounder_links"]
            )
    except (KeyError, TypeError) as exc:
        raise GeneratorSpecError(f"{path}: malformed effect table: {exc}") from exc
    if "start_date" in doc:
        raw = doc["start_date"]
        kwargs["start_date"] = raw if isinstance(raw, date) else date.fromisoformat(str(raw))
    kwargs.update(overrides)
    return GeneratorSpec(**kwargs)
