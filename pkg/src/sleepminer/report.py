"""Deterministic SVG and CSV renderers for the three report shapes.

Joint-distribution heatmaps, min-p significance grids, and the average
effects table. Output is plain text built with fixed formatting, so the
same inputs always produce byte-identical files, which keeps golden-file
tests meaningful.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Sequence
from xml.sax.saxutils import escape

from . import model
from .errors import EmptyMatrixError, MixedMeasuresError
from .mining import EffectEstimate, JointCounts, ScreeningResult

CELL = 54
LEFT_MARGIN = 210
TOP_MARGIN = 80
FONT = "font-family=\"monospace\" font-size=\"12\""

# White up to a deep blue; intensity is count/max linearly.
_LOW_RGB = (255, 255, 255)
_HIGH_RGB = (8, 48, 107)

# Square side caps out at this tail probability.
_P_CAP_EXPONENT = 6.0


def _fill(intensity: float) -> str:
    r = round(_LOW_RGB[0] + (_HIGH_RGB[0] - _LOW_RGB[0]) * intensity)
    g = round(_LOW_RGB[1] + (_HIGH_RGB[1] - _LOW_RGB[1]) * intensity)
    b = round(_LOW_RGB[2] + (_HIGH_RGB[2] - _LOW_RGB[2]) * intensity)
    return f"rgb({r},{g},{b})"


def _svg_open(width: int, height: int, title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{LEFT_MARGIN}" y="24" font-family="monospace" '
        f'font-size="16">{escape(title)}</text>',
    ]


def _csv_text(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def render_joint_heatmap(joint: JointCounts) -> tuple[str, str]:
    """Render co-occurrence counts as an SVG heatmap plus a mirroring CSV.

    Cell fill scales linearly with count/max-count; every cell carries
    its count as text. Returns (svg, csv).
    """
    if not joint.counts or not joint.counts[0]:
        raise EmptyMatrixError(
            f"empty matrix for {joint.input_event} x {joint.output_measure}"
        )
    max_count = max(max(row) for row in joint.counts)
    width = LEFT_MARGIN + CELL * len(joint.output_categories) + 20
    height = TOP_MARGIN + CELL * len(joint.input_categories) + 20
    parts = _svg_open(
        width, height, f"{joint.input_event} vs {joint.output_measure}"
    )
    for j, label in enumerate(joint.output_categories):
        x = LEFT_MARGIN + j * CELL + CELL // 2
        parts.append(
            f'<text x="{x}" y="{TOP_MARGIN - 10}" text-anchor="middle" {FONT}>'
            f"{escape(label)}</text>"
        )
    for i, label in enumerate(joint.input_categories):
        y = TOP_MARGIN + i * CELL + CELL // 2 + 4
        parts.append(
            f'<text x="{LEFT_MARGIN - 8}" y="{y}" text-anchor="end" {FONT}>'
            f"{escape(label)}</text>"
        )
        for j, count in enumerate(joint.counts[i]):
            x = LEFT_MARGIN + j * CELL
            y0 = TOP_MARGIN + i * CELL
            intensity = count / max_count if max_count else 0.0
            text_fill = "white" if intensity > 0.5 else "black"
            parts.append(
                f'<rect x="{x}" y="{y0}" width="{CELL}" height="{CELL}" '
                f'fill="{_fill(intensity)}" stroke="black" stroke-width="1"/>'
            )
            parts.append(
                f'<text x="{x + CELL // 2}" y="{y0 + CELL // 2 + 4}" '
                f'text-anchor="middle" fill="{text_fill}" {FONT}>{count}</text>'
            )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"

    csv_rows = [[f"{joint.input_event}\\{joint.output_measure}"]
                + list(joint.output_categories)]
    for label, row in zip(joint.input_categories, joint.counts):
        csv_rows.append([label] + list(row))
    return svg, _csv_text(csv_rows)


def _square_side(p: float) -> float:
    # -log10(p) scaling, saturating at p = 1e-6; p = 0 hits the cap.
    if p <= 0.0:
        return float(CELL)
    exponent = min(-math.log10(p), _P_CAP_EXPONENT)
    return CELL * exponent / _P_CAP_EXPONENT


def render_significance_grid(
    results: Sequence[ScreeningResult], output_measure: str
) -> tuple[str, str]:
    """Render min-p values for one output measure as a square grid.

    Rows are (input event, input category) pairs; columns are the
    confounder events, each summarized by the row's minimum p over that
    confounder's categories. A square is drawn only for p strictly below
    the screening's alpha, with side length growing in -log10(p) up to
    the full cell at p <= 1e-6. The CSV carries every raw min-p,
    significant or not. Returns (svg, csv).
    """
    if output_measure not in model.OUTPUT_MEASURES:
        raise MixedMeasuresError(f"unknown output measure {output_measure!r}")
    for res in results:
        if res.rule.output_measure != output_measure:
            raise MixedMeasuresError(
                f"result for {res.rule.output_measure!r} mixed into "
                f"{output_measure!r} grid"
            )
    by_rule = {(r.rule.input_event, r.rule.confounder): r for r in results}

    # min_p keys preserve scheme category order, so rows follow it too.
    row_keys: list[tuple[str, str]] = []
    for event in model.INPUT_EVENTS:
        categories: tuple[str, ...] = ()
        for (ev, _conf), res in by_rule.items():
            if ev == event:
                categories = tuple(res.min_p.keys())
                break
        row_keys.extend((event, c) for c in categories)
    columns = list(model.INPUT_EVENTS)

    width = LEFT_MARGIN + CELL * len(columns) + 20
    height = TOP_MARGIN + CELL * len(row_keys) + 20
    parts = _svg_open(width, height, f"min-p grid: {output_measure}")
    for j, conf in enumerate(columns):
        x = LEFT_MARGIN + j * CELL + CELL // 2
        parts.append(
            f'<text x="{x}" y="{TOP_MARGIN - 10}" text-anchor="middle" {FONT} '
            f'transform="rotate(-40 {x} {TOP_MARGIN - 10})">{escape(conf)}</text>'
        )
    csv_rows: list[list] = [
        ["input_event", "input_category", "confounder", "min_p"]
    ]
    for i, (event, category) in enumerate(row_keys):
        y0 = TOP_MARGIN + i * CELL
        parts.append(
            f'<text x="{LEFT_MARGIN - 8}" y="{y0 + CELL // 2 + 4}" '
            f'text-anchor="end" {FONT}>{escape(f"{event}={category}")}</text>'
        )
        for j, conf in enumerate(columns):
            x = LEFT_MARGIN + j * CELL
            parts.append(
                f'<rect x="{x}" y="{y0}" width="{CELL}" height="{CELL}" '
                f'fill="white" stroke="#cccccc" stroke-width="1"/>'
            )
            if conf == event:
                continue
            res = by_rule.get((event, conf))
            if res is None:
                continue
            p = res.min_p.get(category)
            csv_rows.append(
                [event, category, conf, "" if p is None else repr(p)]
            )
            if p is not None and p < res.alpha:
                side = _square_side(p)
                offset = (CELL - side) / 2.0
                parts.append(
                    f'<rect x="{x + offset:.2f}" y="{y0 + offset:.2f}" '
                    f'width="{side:.2f}" height="{side:.2f}" '
                    f'fill="{_fill(0.85)}" stroke="none"/>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n", _csv_text(csv_rows)


def _format_effect(estimate: EffectEstimate) -> str:
    if estimate.avg_effect is None:
        return "0"
    return f"{estimate.avg_effect:+.2f}"


def render_effects_table(
    estimates: Sequence[EffectEstimate],
) -> tuple[str, str]:
    """Render average effects as CSV plus an aligned text table.

    The no-relation sentinel prints as 0, matching the convention that a
    zero cell means no significant relations; the CSV keeps an explicit
    no_relation column so true zeros stay distinguishable. Returns
    (csv, txt).
    """
    csv_rows: list[list] = [
        [
            "input_event",
            "input_category",
            "output_measure",
            "base_category",
            "avg_effect",
            "n_significant",
            "no_relation",
        ]
    ]
    cells: dict[tuple[str, str], dict[str, str]] = {}
    row_order: list[tuple[str, str]] = []
    for est in estimates:
        key = (est.input_event, est.input_category)
        if key not in cells:
            cells[key] = {}
            row_order.append(key)
        cells[key][est.output_measure] = _format_effect(est)
        csv_rows.append(
            [
                est.input_event,
                est.input_category,
                est.output_measure,
                est.base_category,
                "0" if est.avg_effect is None else repr(est.avg_effect),
                est.n_significant,
                "true" if est.avg_effect is None else "false",
            ]
        )

    header = ["input (vs base)"] + list(model.OUTPUT_MEASURES)
    table_rows = [header]
    for event, category in row_order:
        label = f"{event}={category}"
        table_rows.append(
            [label]
            + [
                cells[(event, category)].get(measure, "")
                for measure in model.OUTPUT_MEASURES
            ]
        )
    widths = [
        max(len(str(row[i])) for row in table_rows)
        for i in range(len(header))
    ]
    lines = []
    for idx, row in enumerate(table_rows):
        cols = [str(row[0]).ljust(widths[0])] + [
            str(cell).rjust(widths[i + 1]) for i, cell in enumerate(row[1:])
        ]
        lines.append("  ".join(cols).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    txt = "\n".join(lines) + "\n"
    return _csv_text(csv_rows), txt
