import csv
import io
import xml.etree.ElementTree as ET
from dataclasses import replace
from datetime import date
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings

from pbr.metrics import EmptySeries, SprintMetrics, Trend, compare_teams, compute_pbr, interpret, trend
from pbr.model import PblItem, PclScore, Sprint, Task, TaskEvent
from pbr.model import TaskStatus as S
from pbr.reporting import (
    render_burndown_plot,
    render_sprint_report,
    render_team_comparison,
    render_trend_plot,
    sprint_report_rows,
    team_comparison_rows,
)
from pbr.workflow import BurndownSeries, burndown
from strategies import replay_burndown, sprints

GOLDEN = Path(__file__).parent / "golden"
NS = "{http://www.w3.org/2000/svg}"


def _svg(text):
    root = ET.fromstring(text.split("\n", 1)[1])
    assert root.tag == f"{NS}svg"
    assert root.get("viewBox") == "0 0 800 400"
    return root


def _m(sid, pbr, day):
    pbr = Fraction(str(pbr))
    return SprintMetrics(sid, (), pbr, interpret(pbr), start_date=date(2024, 1, day))


def test_case_study_text_report_golden(sprint):
    text = render_sprint_report(compute_pbr(sprint))
    assert text == (GOLDEN / "case_study_report.txt").read_text()
    assert "PBL2  3.39  4.25" in text
    assert "Warnings" not in text


def test_case_study_csv_report_golden(sprint):
    out = render_sprint_report(compute_pbr(sprint), "csv")
    assert out == (GOLDEN / "case_study_report.csv").read_bytes().decode()
    rows = list(csv.reader(io.StringIO(out)))
    assert [tuple(r) for r in rows] == sprint_report_rows(compute_pbr(sprint))
    assert rows[4][:4] == ["item", "PBL4", "2.41", "3.70"]


def test_report_is_deterministic_and_sorted(sprint):
    shuffled = replace(sprint, items=tuple(reversed(sprint.items)))
    a = render_sprint_report(compute_pbr(sprint))
    assert a == render_sprint_report(compute_pbr(shuffled))
    assert render_sprint_report(compute_pbr(sprint), "csv") == render_sprint_report(compute_pbr(sprint), "csv")


def test_report_warnings_section(sprint):
    s = sprint.with_item(PblItem("PBL10", pcl_scores=(PclScore("TE", "2", "1"),)))
    m = compute_pbr(s)
    text = render_sprint_report(m)
    assert "Warnings:" in text and "PBL10" in text
    rows = sprint_report_rows(m)
    assert rows[-1][0] == "warning"


def test_unknown_format(sprint):
    with pytest.raises(ValueError):
        render_sprint_report(compute_pbr(sprint), "html")


def test_team_comparison():
    table = compare_teams({"B": [_m("b1", 3, 1)], "A": [_m("a1", 3, 1)]})
    text = render_team_comparison(table)
    lines = text.splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("A") and lines[2].startswith("B")
    out = render_team_comparison(table, "csv")
    assert [tuple(r) for r in csv.reader(io.StringIO(out))] == team_comparison_rows(table)
    assert team_comparison_rows(table)[1] == ("A", "3.00", "3.00", "Moderate", "1")


def test_trend_plot_five_sprints():
    t = trend([_m(f"s{i}", v, i + 1) for i, v in enumerate([3.1, 4.2, 2.5, 3.9, 4.8])])
    root = _svg(render_trend_plot(t))
    points = root.findall(f"{NS}circle[@class='point']")
    assert len(points) == 5
    assert [p.get("data-pbr") for p in points] == ["3.10", "4.20", "2.50", "3.90", "4.80"]
    assert len(root.findall(f"{NS}line[@class='grid']")) == 5
    assert [e.text for e in root.findall(f"{NS}text[@class='band']")] == \
        ["Worst", "Bad", "Moderate", "Good", "Excellent"]
    xs = [float(p.get("cx")) for p in points]
    assert xs == sorted(xs)
    assert len(root.findall(f"{NS}polyline")) == 1


def test_trend_plot_single_point():
    root = _svg(render_trend_plot(trend([_m("s", 3.5, 1)])))
    assert len(root.findall(f"{NS}circle[@class='point']")) == 1
    assert root.findall(f"{NS}polyline") == []


def test_trend_plot_flat_at_moderate():
    root = _svg(render_trend_plot(trend([_m(f"s{i}", 3, i + 1) for i in range(4)])))
    moderate = root.find(f"{NS}line[@data-band='Moderate']")
    ys = {pt.split(",")[1] for pt in root.find(f"{NS}polyline").get("points").split()}
    assert ys == {moderate.get("y1")}


def test_trend_plot_empty():
    with pytest.raises(EmptySeries):
        render_trend_plot(Trend((), Fraction(1), Fraction(1), Fraction(1), Fraction(0)))


def _bd_sprint(tasks):
    return Sprint("S", "t", date(2024, 1, 1), 15, (), tuple(tasks))


def test_burndown_plot_untouched():
    s = _bd_sprint([Task("A", "P", estimate_hours=3), Task("B", "P", estimate_hours=6)])
    root = _svg(render_burndown_plot(burndown(s), s))
    days = root.findall(f"{NS}circle[@class='day']")
    assert [int(d.get("data-hours")) for d in days] == [9] * 15
    ideal = root.find(f"{NS}line[@class='ideal']")
    assert float(ideal.get("y1")) == 40.0  # 9h at the top of the plot
    assert float(ideal.get("y2")) == 360.0  # zero at the last day
    ys = {pt.split(",")[1] for pt in root.find(f"{NS}polyline[@class='remaining']").get("points").split()}
    assert len(ys) == 1


def test_burndown_plot_all_done_day_zero():
    hist = (TaskEvent("A", 0, S.NOT_DONE, S.IN_PROGRESS), TaskEvent("A", 0, S.IN_PROGRESS, S.IN_REVIEW),
            TaskEvent("A", 0, S.IN_REVIEW, S.DONE))
    s = _bd_sprint([Task("A", "P", estimate_hours=6, testable=False, history=hist)])
    root = _svg(render_burndown_plot(burndown(s), s))
    assert {d.get("data-hours") for d in root.findall(f"{NS}circle[@class='day']")} == {"0"}
    assert float(root.find(f"{NS}line[@class='ideal']").get("y1")) == 40.0


def test_burndown_plot_empty():
    with pytest.raises(EmptySeries):
        render_burndown_plot(BurndownSeries(()), _bd_sprint([]))


@settings(max_examples=50)
@given(sprints(max_items=3, with_tasks=True))
def test_burndown_plot_matches_replay_oracle(s):
    root = _svg(render_burndown_plot(burndown(s), s))
    plotted = [int(d.get("data-hours")) for d in root.findall(f"{NS}circle[@class='day']")]
    assert plotted == replay_burndown(s)
