"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the line per
criterion. Tolerances are pinned here and nowhere else. Reference
implementations (scipy, statsmodels) appear only as oracles.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

import sleepminer as sm
from sleepminer import model
from sleepminer.discretize import categorize, default_schemes, derive_features
from sleepminer.ingest import filter_consecutive
from sleepminer.mining import effects_all, screen_all, screen_confounder
from sleepminer.model import FeatureRow, RuleTuple
from sleepminer.stats import welch_t
from sleepminer.synth import (
    ConfounderLink,
    PlantedEffect,
    default_generator_spec,
    generate,
)

from test_discretize import BOUNDARY_TABLE

SCHEMES = default_schemes()
SEEDS = range(20)


def _verdict(criterion: str, ok: bool, details: str) -> bool:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({details})")
    return ok


def _rows_for(spec):
    return derive_features(filter_consecutive(generate(spec)))


def test_criterion_1_statistics_kernel_fidelity():
    rng = np.random.default_rng(20240901)
    worst = {"t": 0.0, "df": 0.0, "p": 0.0}
    start = time.perf_counter()
    for _ in range(100):
        n_a = int(rng.integers(3, 201))
        n_b = int(rng.integers(3, 201))
        a = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 4), n_a).tolist()
        b = rng.normal(rng.uniform(-5, 5), rng.uniform(0.5, 4), n_b).tolist()
        res = welch_t(a, b)
        ref = scipy_stats.ttest_ind(b, a, equal_var=False)
        worst["t"] = max(worst["t"], abs(res.t - ref.statistic))
        worst["df"] = max(worst["df"], abs(res.df - ref.df))
        worst["p"] = max(worst["p"], abs(res.p - ref.pvalue))
    elapsed = time.perf_counter() - start
    ok = all(v <= 1e-9 for v in worst.values()) and elapsed < 1.0
    assert _verdict(
        "1 kernel-fidelity",
        ok,
        f"max |dt|={worst['t']:.2e} |ddf|={worst['df']:.2e} "
        f"|dp|={worst['p']:.2e}, runtime {elapsed:.2f}s",
    )


def test_criterion_2_discretization_boundaries():
    failures = [
        (name, value, expected, categorize(value, SCHEMES.schemes[name]))
        for name, value, expected in BOUNDARY_TABLE
        if categorize(value, SCHEMES.schemes[name]) != expected
    ]
    ok = not failures
    assert _verdict(
        "2 boundary-suite",
        ok,
        f"{len(BOUNDARY_TABLE) - len(failures)}/{len(BOUNDARY_TABLE)} "
        f"boundary checks exact",
    ), failures


def test_criterion_3_planted_effect_recovery():
    recovered = 0
    for seed in SEEDS:
        spec = default_generator_spec(
            n_days=365,
            seed=seed,
            planted_effects=(
                PlantedEffect("exercise_day", "Good", "awake_min", 12.0),
            ),
        )
        rows = _rows_for(spec)
        est = sm.estimate_effect(rows, "exercise_day", "Good", "awake_min")
        if (
            est.n_significant > 0
            and est.avg_effect is not None
            and abs(est.avg_effect - 12.0) <= 2.0
        ):
            recovered += 1
    ok = recovered >= 18
    assert _verdict(
        "3 planted-recovery",
        ok,
        f"recovered within +/-2 of +12 in {recovered}/20 seeds (need >= 18)",
    )


def test_criterion_3_null_false_significance_rate():
    significant = 0
    comparisons = 0
    for seed in SEEDS:
        rows = _rows_for(default_generator_spec(n_days=365, seed=seed))
        for est in effects_all(rows):
            significant += est.n_significant
            comparisons += est.n_comparisons
    rate = significant / comparisons
    sd = math.sqrt(0.05 * 0.95 / comparisons)
    ok = abs(rate - 0.05) <= 3 * sd
    assert _verdict(
        "3 null-calibration",
        ok,
        f"rate {significant}/{comparisons} = {rate:.4f} vs 0.05 +/- {3 * sd:.4f}",
    )


def test_criterion_4_confounder_screening_power():
    planted_flags = 0
    dummy_flags = 0
    for seed in SEEDS:
        spec = default_generator_spec(
            n_days=365,
            seed=seed,
            # two pooled SDs of awake_min noise
            confounder_links=(
                ConfounderLink("start_temp", "Warm", "awake_min", 16.0),
            ),
        )
        rows = _rows_for(spec)
        planted = screen_confounder(
            rows, RuleTuple("exercise_week", "awake_min", "start_temp")
        )
        ps = [p for p in planted.min_p.values() if p is not None]
        if ps and min(ps) < 0.05:
            planted_flags += 1
        dummy = screen_confounder(
            rows, RuleTuple("exercise_week", "awake_min", "start_humidity")
        )
        ps = [p for p in dummy.min_p.values() if p is not None]
        if ps and min(ps) < 0.05:
            dummy_flags += 1
    ok = planted_flags >= 18 and dummy_flags <= 4
    assert _verdict(
        "4 screening-power",
        ok,
        f"planted flagged {planted_flags}/20 (need >= 18), "
        f"dummy flagged {dummy_flags}/20 (need <= 4)",
    )


def _permute_outputs(rows, seed):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(rows))
    return [
        FeatureRow(
            night_date=r.night_date,
            inputs=r.inputs,
            outputs=rows[j].outputs,
            output_categories=rows[j].output_categories,
        )
        for r, j in zip(rows, perm)
    ]


def test_criterion_5_permutation_null():
    significant = 0
    cells = 0
    for seed in SEEDS:
        spec = default_generator_spec(
            n_days=365,
            seed=seed,
            planted_effects=(
                PlantedEffect("exercise_day", "Good", "awake_min", 12.0),
            ),
        )
        rows = _permute_outputs(_rows_for(spec), seed + 10_000)
        for res in screen_all(rows):
            for cell in res.cells:
                if cell.test is not None:
                    cells += 1
                    if cell.is_significant(res.alpha):
                        significant += 1
    expected = 0.05 * cells
    sd = math.sqrt(cells * 0.05 * 0.95)
    ok = abs(significant - expected) <= 3 * sd
    assert _verdict(
        "5 permutation-null",
        ok,
        f"significant cells {significant} vs alpha*cells = {expected:.0f} "
        f"+/- {3 * sd:.0f} (cells={cells})",
    )


def test_criterion_6_counting_invariants():
    rows = _rows_for(default_generator_spec(n_days=30, seed=0))
    n_screen = len(screen_all(rows))
    n_effects = len(effects_all(rows))
    ok = n_screen == 360 and n_effects == 84
    assert _verdict(
        "6 counting-invariants",
        ok,
        f"screenings {n_screen} (want 360), effect estimates {n_effects} (want 84)",
    )


def _run_pipe(out_dir: Path) -> None:
    shell = (
        f"{sys.executable} -m sleepminer.cli synth --seed 7 --n-days 200 | "
        f"{sys.executable} -m sleepminer.cli analyze --records - "
        f"--out-dir {out_dir}"
    )
    proc = subprocess.run(shell, shell=True, capture_output=True, timeout=300)
    assert proc.returncode == 0, proc.stderr.decode()


def test_criterion_7_determinism(tmp_path):
    dir_a = tmp_path / "a"
    dir_b = tmp_path / "b"
    _run_pipe(dir_a)
    _run_pipe(dir_b)
    names_a = sorted(p.name for p in dir_a.iterdir())
    names_b = sorted(p.name for p in dir_b.iterdir())
    identical = names_a == names_b and all(
        (dir_a / n).read_bytes() == (dir_b / n).read_bytes() for n in names_a
    )
    assert _verdict(
        "7 determinism",
        identical,
        f"{len(names_a)} report files byte-identical across two piped runs",
    )


def test_criterion_8_screening_result_shape():
    rows = _rows_for(default_generator_spec(n_days=365, seed=12))
    res = screen_confounder(
        rows, RuleTuple("awake_between", "awake_min", "prev_awake_min")
    )
    pairs = [(c.input_category, c.confounder_category) for c in res.cells]
    expected_pairs = [
        (i, c)
        for i in SCHEMES.input_categories("awake_between")
        for c in SCHEMES.input_categories("prev_awake_min")
    ]
    shape_ok = pairs == expected_pairs and len(pairs) == 6
    cells_ok = all(
        c.test is not None
        and isinstance(c.test.mean_diff, float)
        and isinstance(c.is_significant(res.alpha), bool)
        for c in res.cells
    )
    signed_ok = any(c.test.mean_diff < 0 for c in res.cells) or any(
        c.test.mean_diff > 0 for c in res.cells
    )
    ok = shape_ok and cells_ok and signed_ok
    assert _verdict(
        "8 screening-shape",
        ok,
        "3 input categories x 2 confounder categories, all cells tested "
        "with signed mean differences and significance booleans",
    )


def test_criterion_9_performance():
    spec = default_generator_spec(
        n_days=1100,
        seed=3,
        planted_effects=(
            PlantedEffect("exercise_day", "Good", "awake_min", 12.0),
        ),
    )
    rows = _rows_for(spec)
    start = time.perf_counter()
    screens = screen_all(rows)
    estimates = effects_all(rows)
    for input_event in model.INPUT_EVENTS:
        for output_measure in model.OUTPUT_MEASURES:
            sm.render_joint_heatmap(
                sm.joint_distribution(rows, input_event, output_measure)
            )
    for output_measure in model.OUTPUT_MEASURES:
        sm.render_significance_grid(
            [r for r in screens if r.rule.output_measure == output_measure],
            output_measure,
        )
    sm.render_effects_table(estimates)
    elapsed = time.perf_counter() - start
    ok = elapsed < 10.0
    assert _verdict(
        "9 performance",
        ok,
        f"360 screenings + {len(estimates)} estimates + all renders on "
        f"1100 days in {elapsed:.2f}s (< 10s)",
    )
