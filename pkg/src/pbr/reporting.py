"""Text/CSV reports and dependency-free SVG plots.

Every renderer is a pure function of its input, so output can be compared
against golden files byte for byte.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from pbr.metrics import EmptySeries, InterpretationBand, SprintMetrics, TeamRow, Trend, truncate2
from pbr.model import Sprint
from pbr.workflow import BurndownSeries

WIDTH = 800
HEIGHT = 400
MARGIN = 40
PLOT_LEFT = MARGIN
PLOT_RIGHT = WIDTH - MARGIN
PLOT_TOP = MARGIN
PLOT_BOTTOM = HEIGHT - MARGIN

SPRINT_CSV_HEADER = ("record", "id", "pcl", "tar", "pbr", "band", "note")
TEAM_CSV_HEADER = ("team", "latest_pbr", "mean_pbr", "band", "sprints")


def _natural_key(text: str) -> list:
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", text)]


def _fmt(value: Fraction | Decimal) -> str:
    return str(truncate2(Fraction(value)))


def _table(rows: Sequence[Sequence[str]], numeric_from: int = 1) -> list[str]:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    out = []
    for row in rows:
        cells = [
            cell.rjust(widths[c]) if c >= numeric_from else cell.ljust(widths[c])
            for c, cell in enumerate(row)
        ]
        out.append("  ".join(cells).rstrip())
    return out


def _csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerows(rows)
    return buf.getvalue()


# -- sprint report --------------------------------------------------------

@dataclass(frozen=True)
class SprintReport:
    sprint_id: str
    team_id: str
    dates: str
    rows: tuple[tuple[str, str, str], ...]
    pbr: str
    band: str
    warnings: tuple[str, ...]


def build_sprint_report(metrics: SprintMetrics) -> SprintReport:
    items = sorted(metrics.items, key=lambda m: _natural_key(m.item_id))
    dates = ""
    if metrics.start_date is not None:
        dates = metrics.start_date.isoformat()
        if metrics.end_date is not None:
            dates += f" .. {metrics.end_date.isoformat()}"
    return SprintReport(
        sprint_id=metrics.sprint_id,
        team_id=metrics.team_id,
        dates=dates,
        rows=tuple((m.item_id, str(m.pcl_display), str(m.tar_display)) for m in items),
        pbr=str(metrics.pbr_display),
        band=metrics.band.label,
        warnings=metrics.warnings,
    )


def sprint_report_rows(metrics: SprintMetrics) -> list[tuple[str, ...]]:
    """The CSV report as rows, header first."""
    report = build_sprint_report(metrics)
    rows: list[tuple[str, ...]] = [SPRINT_CSV_HEADER]
    rows += [("item", item, pcl, tar, "", "", "") for item, pcl, tar in report.rows]
    rows.append(("sprint", report.sprint_id, "", "", report.pbr, report.band, ""))
    rows += [("warning", report.sprint_id, "", "", "", "", w) for w in report.warnings]
    return rows


def render_sprint_report(metrics: SprintMetrics, format: str = "text") -> str:
    if format == "csv":
        return _csv(sprint_report_rows(metrics))
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    report = build_sprint_report(metrics)
    header = f"Sprint {report.sprint_id}"
    if report.team_id:
        header += f"  team {report.team_id}"
    if report.dates:
        header += f"  {report.dates}"
    lines = [header, ""]
    lines += _table([("Item", "PCL", "TAR")] + list(report.rows))
    lines += ["", f"PBR {report.pbr} ({report.band})"]
    if report.warnings:
        lines += ["", "Warnings:"] + [f"  - {w}" for w in report.warnings]
    return "\n".join(lines) + "\n"


# -- team comparison ------------------------------------------------------

def team_comparison_rows(table: Sequence[TeamRow]) -> list[tuple[str, ...]]:
    rows: list[tuple[str, ...]] = [TEAM_CSV_HEADER]
    for r in table:
        rows.append((r.team_id, _fmt(r.latest_pbr), _fmt(r.mean_pbr), r.band.label, str(r.sprints)))
    return rows


def render_team_comparison(table: Sequence[TeamRow], format: str = "text") -> str:
    rows = team_comparison_rows(table)
    if format == "csv":
        return _csv(rows)
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    head = ("Team", "Latest PBR", "Mean PBR", "Band", "Sprints")
    return "\n".join(_table([head] + rows[1:])) + "\n"


# -- SVG ------------------------------------------------------------------

def _svg_open(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]


def _x_positions(n: int) -> list[float]:
    if n == 1:
        return [(PLOT_LEFT + PLOT_RIGHT) / 2]
    step = (PLOT_RIGHT - PLOT_LEFT) / (n - 1)
    return [PLOT_LEFT + i * step for i in range(n)]


def _axes() -> list[str]:
    return [
        f'<line class="axis" x1="{PLOT_LEFT}" y1="{PLOT_BOTTOM}" x2="{PLOT_RIGHT}" y2="{PLOT_BOTTOM}" stroke="#000000"/>',
        f'<line class="axis" x1="{PLOT_LEFT}" y1="{PLOT_TOP}" x2="{PLOT_LEFT}" y2="{PLOT_BOTTOM}" stroke="#000000"/>',
    ]


def _pbr_y(value: Fraction) -> float:
    return PLOT_BOTTOM - float((value - 1) / 4) * (PLOT_BOTTOM - PLOT_TOP)


def render_trend_plot(series: Trend, title: str = "PBR by sprint") -> str:
    """Line chart of PBR per sprint on a fixed 1-5 axis with band gridlines."""
    if not series.points:
        raise EmptySeries("nothing to plot")
    out = _svg_open(title)
    for band in InterpretationBand:
        y = _pbr_y(Fraction(int(band)))
        out.append(f'<line class="grid" data-band="{band.label}" x1="{PLOT_LEFT}" y1="{y:.2f}" '
                   f'x2="{PLOT_RIGHT}" y2="{y:.2f}" stroke="#d9d9d9"/>')
        out.append(f'<text class="tick" x="{PLOT_LEFT - 6}" y="{y + 4:.2f}" text-anchor="end">{int(band)}</text>')
        out.append(f'<text class="band" x="{PLOT_RIGHT - 2}" y="{y - 4:.2f}" text-anchor="end" '
                   f'fill="#666666">{band.label}</text>')
    out += _axes()
    xs = _x_positions(len(series.points))
    coords = [(x, _pbr_y(p.pbr)) for x, p in zip(xs, series.points)]
    if len(coords) > 1:
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
        out.append(f'<polyline class="series" fill="none" stroke="#1f77b4" stroke-width="2" points="{pts}"/>')
    for (x, y), p in zip(coords, series.points):
        out.append(f'<circle class="point" data-sprint={quoteattr(p.sprint_id)} data-pbr="{_fmt(p.pbr)}" '
                   f'cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#1f77b4"/>')
        out.append(f'<text class="xlabel" x="{x:.2f}" y="{PLOT_BOTTOM + 16}" text-anchor="middle">'
                   f'{escape(p.sprint_id)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_burndown_plot(series: BurndownSeries, sprint: Sprint) -> str:
    """Remaining hours as a step line, with the ideal straight burn to zero."""
    if not series.points:
        raise EmptySeries("nothing to plot")
    initial = sum(t.estimate_hours for t in sprint.tasks if t.added_day == 0)
    top = max([initial, *series.remaining, 1])
    plot_h = PLOT_BOTTOM - PLOT_TOP

    def y_of(hours: int) -> float:
        return PLOT_BOTTOM - hours / top * plot_h

    out = _svg_open(f"Burndown {sprint.id}")
    for i in range(5):
        hours = top * i / 4
        y = PLOT_BOTTOM - plot_h * i / 4
        out.append(f'<line class="grid" x1="{PLOT_LEFT}" y1="{y:.2f}" x2="{PLOT_RIGHT}" y2="{y:.2f}" stroke="#d9d9d9"/>')
        out.append(f'<text class="tick" x="{PLOT_LEFT - 6}" y="{y + 4:.2f}" text-anchor="end">{hours:g}</text>')
    out += _axes()
    xs = _x_positions(len(series.points))
    ideal_end = xs[-1]
    out.append(f'<line class="ideal" x1="{xs[0]:.2f}" y1="{y_of(initial):.2f}" x2="{ideal_end:.2f}" '
               f'y2="{y_of(0):.2f}" stroke="#999999" stroke-dasharray="6 4"/>')
    steps: list[str] = []
    for i, (x, hours) in enumerate(zip(xs, series.remaining)):
        if i:
            steps.append(f"{x:.2f},{y_of(series.remaining[i - 1]):.2f}")
        steps.append(f"{x:.2f},{y_of(hours):.2f}")
    out.append(f'<polyline class="remaining" fill="none" stroke="#d62728" stroke-width="2" points="{" ".join(steps)}"/>')
    for x, (day, hours) in zip(xs, series.points):
        out.append(f'<circle class="day" data-day="{day}" data-hours="{hours}" cx="{x:.2f}" '
                   f'cy="{y_of(hours):.2f}" r="3" fill="#d62728"/>')
        out.append(f'<text class="xlabel" x="{x:.2f}" y="{PLOT_BOTTOM + 16}" text-anchor="middle">{day}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
