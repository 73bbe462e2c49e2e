"""Command-line front end: ingest, analyze, synth.

Exit codes: 0 success, 1 malformed data or generator spec, 2 I/O
problems, 3 analysis had zero usable feature rows.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, mining, report, synth
from .discretize import default_schemes, derive_features, load_schemes
from .errors import (
    GeneratorSpecError,
    ParseError,
    SchemeError,
    SleepMinerError,
)
from .ingest import (
    MergePolicy,
    filter_consecutive,
    merge_day_records,
    parse_activity_log,
    parse_environment_log,
    parse_meal_log,
    parse_sleep_log,
    read_day_records,
    save_day_records,
    write_day_records,
)
from .model import INPUT_EVENTS, OUTPUT_MEASURES

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2
EXIT_EMPTY = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sleepminer",
        description=(
            "Mine per-night lifestyle/sleep records for rules of the form "
            "input event -> sleep outcome under confounders."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser(
        "ingest", help="merge the four source logs into dayrecords.csv"
    )
    p_ingest.add_argument("--sleep", required=True, help="sleep.csv path")
    p_ingest.add_argument("--activity", required=True, help="activity.csv path")
    p_ingest.add_argument("--env", required=True, help="environment.csv path")
    p_ingest.add_argument("--meals", required=True, help="meals.csv path")
    p_ingest.add_argument("--out", required=True, help="output dayrecords.csv")
    p_ingest.add_argument(
        "--min-run",
        type=int,
        default=2,
        help="minimum consecutive-night run length to keep (default 2)",
    )
    p_ingest.add_argument(
        "--env-window",
        type=float,
        default=30.0,
        help="max minutes between an environment sample and onset (default 30)",
    )
    p_ingest.set_defaults(func=cmd_ingest)

    p_analyze = sub.add_parser(
        "analyze", help="run both experiment stages and render all reports"
    )
    p_analyze.add_argument(
        "--records", required=True, help="dayrecords.csv path, or - for stdin"
    )
    p_analyze.add_argument(
        "--schemes", default=None, help="optional TOML scheme overrides"
    )
    p_analyze.add_argument("--alpha", type=float, default=0.05)
    p_analyze.add_argument("--min-n", type=int, default=3)
    p_analyze.add_argument("--out-dir", default="./reports")
    p_analyze.set_defaults(func=cmd_analyze)

    p_synth = sub.add_parser(
        "synth", help="generate a synthetic dayrecords.csv"
    )
    p_synth.add_argument(
        "--spec", default=None, help="TOML generator spec (defaults built in)"
    )
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--n-days", type=int, default=None)
    p_synth.add_argument(
        "--out", default="-", help="output path, or - for stdout (default)"
    )
    p_synth.set_defaults(func=cmd_synth)
    return parser


def cmd_ingest(args) -> int:
    try:
        sessions = parse_sleep_log(args.sleep)
        activities = parse_activity_log(args.activity)
        env = parse_environment_log(args.env)
        meals = parse_meal_log(args.meals)
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    policy = MergePolicy(env_window_min=args.env_window)
    try:
        merged = merge_day_records(sessions, activities, env, meals, policy)
        kept = filter_consecutive(merged, min_run=args.min_run)
    except SleepMinerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        save_day_records(kept, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    print(f"sessions parsed:      {len(sessions)}")
    print(f"records merged:       {len(merged)}")
    print(f"records kept:         {len(kept)}")
    print(f"records dropped:      {len(merged) - len(kept)} (non-consecutive)")
    if not kept:
        print(
            "warning: no consecutive-night runs found; output is empty",
            file=sys.stderr,
        )
    return EXIT_OK


def _summary_lines(screenings) -> list[str]:
    entries = []
    for res in screenings:
        for cell in res.cells:
            if not cell.is_significant(res.alpha):
                continue
            line = (
                f"{res.rule.input_event}={cell.input_category} -> "
                f"{res.rule.output_measure} | "
                f"C={res.rule.confounder}={cell.confounder_category} | "
                f"dmean={cell.test.mean_diff:+.2f} | p={cell.test.p:.3g}"
            )
            entries.append((cell.test.p, line))
    entries.sort(key=lambda e: (e[0], e[1]))
    return [line for _, line in entries]


def cmd_analyze(args) -> int:
    try:
        if args.records == "-":
            records = read_day_records(sys.stdin)
        else:
            records = read_day_records(args.records)
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        schemes = load_schemes(args.schemes) if args.schemes else default_schemes()
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except SchemeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        rows = derive_features(filter_consecutive(records), schemes)
    except SleepMinerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not rows:
        print("error: no usable feature rows (need consecutive nights)", file=sys.stderr)
        return EXIT_EMPTY

    screenings = mining.screen_all(rows, alpha=args.alpha, min_n=args.min_n, schemes=schemes)
    estimates = mining.effects_all(rows, alpha=args.alpha, min_n=args.min_n, schemes=schemes)

    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for input_event in INPUT_EVENTS:
            for output_measure in OUTPUT_MEASURES:
                joint = mining.joint_distribution(
                    rows, input_event, output_measure, schemes
                )
                svg, csv_text = report.render_joint_heatmap(joint)
                stem = f"joint_{input_event}_{output_measure}"
                (out_dir / f"{stem}.svg").write_text(svg, encoding="utf-8")
                (out_dir / f"{stem}.csv").write_text(csv_text, encoding="utf-8")
        for output_measure in OUTPUT_MEASURES:
            subset = [
                r for r in screenings if r.rule.output_measure == output_measure
            ]
            svg, csv_text = report.render_significance_grid(subset, output_measure)
            (out_dir / f"screen_{output_measure}.svg").write_text(svg, encoding="utf-8")
            (out_dir / f"screen_{output_measure}.csv").write_text(csv_text, encoding="utf-8")
        effects_csv, effects_txt = report.render_effects_table(estimates)
        (out_dir / "effects.csv").write_text(effects_csv, encoding="utf-8")
        (out_dir / "effects.txt").write_text(effects_txt, encoding="utf-8")

        lines = _summary_lines(screenings)
        summary = [
            f"significant screening results: {len(lines)} (alpha={args.alpha:g})"
        ] + lines
        (out_dir / "summary.txt").write_text(
            "\n".join(summary) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        print(f"error: cannot write reports: {exc.strerror}", file=sys.stderr)
        return EXIT_IO

    print(f"feature rows analyzed: {len(rows)}")
    print(f"significant screening results: {len(lines)}")
    print(f"reports written to {out_dir}")
    return EXIT_OK


def cmd_synth(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_days is not None:
        overrides["n_days"] = args.n_days
    try:
        if args.spec:
            spec = synth.load_generator_spec(args.spec, **overrides)
        else:
            spec = synth.default_generator_spec(
                n_days=overrides.get("n_days", 365),
                seed=overrides.get("seed", 0),
            )
        records = synth.generate(spec)
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except GeneratorSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        if args.out == "-":
            write_day_records(records, sys.stdout)
        else:
            save_day_records(records, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    print(f"generated {len(records)} records (seed {spec.seed})", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
