"""Two-stage rule mining over categorized nightly feature rows.

Stage 1 screens every (input event, output measure, confounder) triple by
testing each baseline distribution against the same distribution further
conditioned on one confounder category. The conditioned sample is a
subset of its baseline, as in the source methodology; see README for the
statistical caveat that entails.

Stage 2 estimates how much switching an input away from its base category
moves an output, holding one confounder category fixed at a time, and
averages the mean differences over all significant conditioned
comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import model
from .discretize import SchemeSet, default_schemes
from .errors import BaseCategoryError, UnknownNameError
from .model import FeatureRow, RuleTuple
from .stats import TestResult, welch_t

DEFAULT_ALPHA = 0.05
DEFAULT_MIN_N = 3


@dataclass(frozen=True)
class ScreeningCell:
    """One baseline-vs-conditioned comparison inside a screening.

    `test` is None when either sample was below the minimum size, in
    which case the cell is never counted as significant.
    """

    input_category: str
    confounder_category: str
    n_baseline: int
    n_conditioned: int
    test: TestResult | None

    def is_significant(self, alpha: float) -> bool:
        return self.test is not None and self.test.p < alpha


@dataclass(frozen=True)
class ScreeningResult:
    """All conditioned comparisons for one rule, plus per-row minima.

    `min_p` maps each input category to the smallest p over that row's
    confounder categories (None when no cell had enough data); it is the
    per-cell value shown in the significance grids.
    """

    rule: RuleTuple
    cells: tuple[ScreeningCell, ...]
    min_p: Mapping[str, float | None]
    alpha: float

    def cell(self, input_category: str, confounder_category: str) -> ScreeningCell:
        for c in self.cells:
            if (
                c.input_category == input_category
                and c.confounder_category == confounder_category
            ):
                return c
        raise KeyError((input_category, confounder_category))

    def significant_cells(self) -> tuple[ScreeningCell, ...]:
        return tuple(c for c in self.cells if c.is_significant(self.alpha))


@dataclass(frozen=True)
class Contribution:
    """One significant conditioned comparison feeding an effect average."""

    confounder: str
    confounder_category: str
    mean_diff: float
    p: float


@dataclass(frozen=True)
class EffectEstimate:
    """Average effect of one non-base input category on one output.

    `avg_effect` is None (the no-relation sentinel) when no conditioned
    comparison reached significance; reports render that as 0.
    `n_comparisons` counts the conditioned comparisons that had enough
    data to be tested at all.
    """

    input_event: str
    input_category: str
    output_measure: str
    base_category: str
    avg_effect: float | None
    n_significant: int
    contributing: tuple[Contribution, ...]
    n_comparisons: int = 0


@dataclass(frozen=True)
class JointCounts:
    """Category-by-category co-occurrence counts for one input/output pair."""

    input_event: str
    output_measure: str
    input_categories: tuple[str, ...]
    output_categories: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def _check_names(input_event: str, output_measure: str) -> None:
    if input_event not in model.INPUT_EVENTS:
        raise UnknownNameError(f"unknown input event {input_event!r}")
    if output_measure not in model.OUTPUT_MEASURES:
        raise UnknownNameError(f"unknown output measure {output_measure!r}")


def baseline_sample(
    rows: Sequence[FeatureRow],
    input_event: str,
    input_category: str,
    output_measure: str,
) -> list[float]:
    """Output values of all rows whose input event has the given category.

    Rows where the input is unavailable are excluded.
    """
    _check_names(input_event, output_measure)
    return [
        r.outputs[output_measure]
        for r in rows
        if r.inputs[input_event] == input_category
    ]


def screen_confounder(
    rows: Sequence[FeatureRow],
    rule: RuleTuple,
    alpha: float = DEFAULT_ALPHA,
    min_n: int = DEFAULT_MIN_N,
    schemes: SchemeSet | None = None,
) -> ScreeningResult:
    """Stage 1 for one rule: test baseline vs conditioned per category pair.

    For every input category the baseline sample holds the output values
    of rows in that category (restricted to rows where the confounder is
    available); each conditioned sample further restricts the baseline to
    one confounder category, and the reported mean difference is
    conditioned minus baseline.
    """
    if min_n < 2:
        raise ValueError("min_n must be at least 2")
    schemes = schemes or default_schemes()
    usable = [
        r
        for r in rows
        if r.inputs[rule.input_event] is not None
        and r.inputs[rule.confounder] is not None
    ]
    cells = []
    min_p: dict[str, float | None] = {}
    for in_cat in schemes.input_categories(rule.input_event):
        base_rows = [r for r in usable if r.inputs[rule.input_event] == in_cat]
        baseline = [r.outputs[rule.output_measure] for r in base_rows]
        row_min: float | None = None
        for conf_cat in schemes.input_categories(rule.confounder):
            conditioned = [
                r.outputs[rule.output_measure]
                for r in base_rows
                if r.inputs[rule.confounder] == conf_cat
            ]
            test = None
            if len(baseline) >= min_n and len(conditioned) >= min_n:
                test = welch_t(baseline, conditioned)
                if row_min is None or test.p < row_min:
                    row_min = test.p
            cells.append(
                ScreeningCell(
                    input_category=in_cat,
                    confounder_category=conf_cat,
                    n_baseline=len(baseline),
                    n_conditioned=len(conditioned),
                    test=test,
                )
            )
        min_p[in_cat] = row_min
    return ScreeningResult(
        rule=rule, cells=tuple(cells), min_p=min_p, alpha=alpha
    )


def screen_all(
    rows: Sequence[FeatureRow],
    alpha: float = DEFAULT_ALPHA,
    min_n: int = DEFAULT_MIN_N,
    schemes: SchemeSet | None = None,
    bonferroni: bool = False,
) -> list[ScreeningResult]:
    """Stage 1 over every rule: all input/output/confounder combinations.

    Emits results in sorted (input event, output measure, confounder)
    order, one per rule. With `bonferroni` the significance level is
    divided by the nominal number of comparisons in the sweep.
    """
    schemes = schemes or default_schemes()
    if bonferroni:
        n_tests = sum(
            len(schemes.input_categories(e)) * len(schemes.input_categories(c))
            for e in model.INPUT_EVENTS
            for c in model.INPUT_EVENTS
            if c != e
        ) * len(model.OUTPUT_MEASURES)
        alpha = alpha / n_tests
    results = []
    for input_event in sorted(model.INPUT_EVENTS):
        for output_measure in sorted(model.OUTPUT_MEASURES):
            for confounder in sorted(model.INPUT_EVENTS):
                if confounder == input_event:
                    continue
                rule = RuleTuple(input_event, output_measure, confounder)
                results.append(
                    screen_confounder(rows, rule, alpha, min_n, schemes)
                )
    return results


def estimate_effect(
    rows: Sequence[FeatureRow],
    input_event: str,
    input_category: str,
    output_measure: str,
    alpha: float = DEFAULT_ALPHA,
    min_n: int = DEFAULT_MIN_N,
    schemes: SchemeSet | None = None,
) -> EffectEstimate:
    """Stage 2: average effect of `input_category` versus its base category.

    For each confounder category, rows matching that category are split
    into base-category and query-category samples and Welch-tested; the
    significant mean differences (query minus base) are averaged. With no
    significant comparison the estimate carries the no-relation sentinel.
    """
    if min_n < 2:
        raise ValueError("min_n must be at least 2")
    _check_names(input_event, output_measure)
    schemes = schemes or default_schemes()
    categories = schemes.input_categories(input_event)
    if input_category not in categories:
        raise UnknownNameError(
            f"{input_category!r} is not a category of {input_event!r}"
        )
    base = schemes.base_category(input_event)
    if input_category == base:
        raise BaseCategoryError(
            f"{input_event!r}: cannot estimate the base category {base!r} "
            "against itself"
        )
    contributing = []
    n_comparisons = 0
    for confounder in sorted(model.INPUT_EVENTS):
        if confounder == input_event:
            continue
        for conf_cat in schemes.input_categories(confounder):
            stratum = [
                r
                for r in rows
                if r.inputs[confounder] == conf_cat
                and r.inputs[input_event] is not None
            ]
            sample_base = [
                r.outputs[output_measure]
                for r in stratum
                if r.inputs[input_event] == base
            ]
            sample_query = [
                r.outputs[output_measure]
                for r in stratum
                if r.inputs[input_event] == input_category
            ]
            if len(sample_base) < min_n or len(sample_query) < min_n:
                continue
            n_comparisons += 1
            test = welch_t(sample_base, sample_query)
            if test.p < alpha:
                contributing.append(
                    Contribution(confounder, conf_cat, test.mean_diff, test.p)
                )
    avg = (
        math.fsum(c.mean_diff for c in contributing) / len(contributing)
        if contributing
        else None
    )
    return EffectEstimate(
        input_event=input_event,
        input_category=input_category,
        output_measure=output_measure,
        base_category=base,
        avg_effect=avg,
        n_significant=len(contributing),
        contributing=tuple(contributing),
        n_comparisons=n_comparisons,
    )


def effects_all(
    rows: Sequence[FeatureRow],
    alpha: float = DEFAULT_ALPHA,
    min_n: int = DEFAULT_MIN_N,
    schemes: SchemeSet | None = None,
    bonferroni: bool = False,
) -> list[EffectEstimate]:
    """Stage 2 over every (input event, non-base category, output measure).

    With `bonferroni` the significance level is divided by the nominal
    number of conditioned comparisons in the sweep.
    """
    schemes = schemes or default_schemes()
    if bonferroni:
        n_tests = sum(
            (len(schemes.input_categories(e)) - 1)
            * len(model.OUTPUT_MEASURES)
            * sum(
                len(schemes.input_categories(c))
                for c in model.INPUT_EVENTS
                if c != e
            )
            for e in model.INPUT_EVENTS
        )
        alpha = alpha / n_tests
    estimates = []
    for input_event in sorted(model.INPUT_EVENTS):
        base = schemes.base_category(input_event)
        for category in schemes.input_categories(input_event):
            if category == base:
                continue
            for output_measure in sorted(model.OUTPUT_MEASURES):
                estimates.append(
                    estimate_effect(
                        rows,
                        input_event,
                        category,
                        output_measure,
                        alpha,
                        min_n,
                        schemes,
                    )
                )
    return estimates


def joint_distribution(
    rows: Sequence[FeatureRow],
    input_event: str,
    output_measure: str,
    schemes: SchemeSet | None = None,
) -> JointCounts:
    """Co-occurrence counts of input categories against output categories."""
    _check_names(input_event, output_measure)
    schemes = schemes or default_schemes()
    in_cats = schemes.input_categories(input_event)
    out_cats = schemes.for_output(output_measure).categories
    counts = [[0] * len(out_cats) for _ in in_cats]
    in_index = {c: i for i, c in enumerate(in_cats)}
    out_index = {c: i for i, c in enumerate(out_cats)}
    for r in rows:
        cat = r.inputs[input_event]
        if cat is None:
            continue
        counts[in_index[cat]][out_index[r.output_categories[output_measure]]] += 1
    return JointCounts(
        input_event=input_event,
        output_measure=output_measure,
        input_categories=in_cats,
        output_categories=out_cats,
        counts=tuple(tuple(row) for row in counts),
    )
