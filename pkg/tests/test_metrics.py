from datetime import date
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given

from pbr.casestudy import PCL_TABLE, PRINTED_PCL, PRINTED_TAR, TAR_TABLE
from pbr.metrics import (
    EmptyInput,
    EmptyScores,
    EmptySeries,
    EmptySprint,
    InterpretationBand,
    OutOfRange,
    SprintMetrics,
    compare_teams,
    compute_pbr,
    compute_pcl,
    compute_tar,
    interpret,
    trend,
    truncate2,
)
from pbr.model import PblItem, PclScore, Sprint, TarScore
from properties import PROPERTIES
from strategies import naive_pcl, naive_pbr, naive_tar

B = InterpretationBand

# Frozen from the naive Fraction oracle over the raw table cells.
ORACLE_PCL = {
    "PBL1": Fraction(365, 74),      # 36.5 / 7.4
    "PBL2": Fraction(190, 56),      # 19.0 / 5.6
    "PBL3": Fraction(210, 58),      # 21.0 / 5.8
    "PBL4": Fraction(1305, 540),    # 13.05 / 5.4
    "PBL5": Fraction(293, 67),      # 29.3 / 6.7
}
ORACLE_TAR = {
    "PBL1": Fraction(41, 12),
    "PBL2": Fraction(17, 4),
    "PBL3": Fraction(55, 12),
    "PBL4": Fraction(89, 24),
    "PBL5": Fraction(31, 12),
}
ORACLE_PBR = Fraction(9873657359, 2715418896)


def test_frozen_oracle_values_match_naive_loops():
    for item_id, (values, weights) in PCL_TABLE.items():
        assert naive_pcl(values, weights) == ORACLE_PCL[item_id]
        assert naive_tar(TAR_TABLE[item_id]) == ORACLE_TAR[item_id]
    order = sorted(PCL_TABLE)
    assert naive_pbr([ORACLE_PCL[k] for k in order], [ORACLE_TAR[k] for k in order]) == ORACLE_PBR


@pytest.mark.parametrize("item_id", sorted(PCL_TABLE))
def test_case_study_pcl(sprint, item_id):
    pcl = compute_pcl(sprint.item(item_id))
    assert pcl == ORACLE_PCL[item_id]
    assert abs(truncate2(pcl) - Decimal(PRINTED_PCL[item_id])) <= Decimal("0.02")


@pytest.mark.parametrize("item_id", sorted(TAR_TABLE))
def test_case_study_tar(sprint, item_id):
    tar = compute_tar(sprint.item(item_id))
    assert tar == ORACLE_TAR[item_id]
    assert str(truncate2(tar)) == PRINTED_TAR[item_id]


def test_pbl1_and_pbl3_details(sprint):
    assert compute_pcl(sprint.item("PBL1")) == Fraction("36.5") / Fraction("7.4")
    assert str(truncate2(compute_pcl(sprint.item("PBL1")))) == "4.93"
    assert compute_pcl(sprint.item("PBL3")) == Fraction("21.0") / Fraction("5.8")
    assert str(truncate2(compute_pcl(sprint.item("PBL3")))) == "3.62"


def test_pbl4_pcl_truncates_below_table_cell(sprint):
    # exact 2.41666..; the 2.42 cell sums per-cell rounded ratings (1.75 -> 1.8)
    assert str(truncate2(compute_pcl(sprint.item("PBL4")))) == "2.41"


def test_case_study_pbr(sprint):
    m = compute_pbr(sprint)
    assert m.pbr == ORACLE_PBR
    assert str(m.pbr_display) == "3.63"
    assert m.band is B.GOOD
    assert float(sum(r.pcl * r.tar for r in m.items)) == pytest.approx(68.126017, abs=1e-6)
    assert float(sum(r.pcl for r in m.items)) == pytest.approx(18.735780, abs=1e-6)


def test_truncation_rule():
    assert str(truncate2(Fraction(41, 12))) == "3.41"
    assert str(truncate2(Fraction(89, 24))) == "3.70"
    assert str(truncate2(Fraction(5))) == "5.00"
    assert str(truncate2(Fraction(-7, 6))) == "-1.16"


def test_constant_values():
    item = PblItem("X", pcl_scores=(PclScore("TE", "3.5", "0.2"), PclScore("BA", "3.5", "0.9")),
                   tar_scores=tuple(TarScore(f, "5") for f in ("BC", "SB", "RC")))
    assert compute_pcl(item) == Fraction(7, 2)
    assert compute_tar(item) == 5


def test_partial_tar_divides_by_scored_count():
    item = PblItem("X", pcl_scores=(PclScore("TE", "3", "1"),),
                   tar_scores=(TarScore("BC", "4"), TarScore("SB", "2")))
    assert compute_tar(item) == 3


def test_empty_scores():
    with pytest.raises(EmptyScores):
        compute_pcl(PblItem("X"))
    with pytest.raises(EmptyScores):
        compute_tar(PblItem("X"))


def _sprint(*items):
    return Sprint("S", "t", date(2024, 1, 1), 10, items)


def test_single_item_pbr_is_its_tar(sprint):
    item = sprint.item("PBL2")
    assert compute_pbr(_sprint(item)).pbr == compute_tar(item)


def test_shared_tar_gives_that_tar(sprint):
    items = [PblItem(i.id, pcl_scores=i.pcl_scores, tar_scores=(TarScore("BC", "3.25"),)) for i in sprint.items]
    assert compute_pbr(_sprint(*items)).pbr == Fraction("3.25")


def test_unrated_item_excluded_with_warning(sprint):
    unrated = PblItem("PBL6", pcl_scores=(PclScore("TE", "4", "1"),))
    s = _sprint(*sprint.items, unrated)
    m = compute_pbr(s)
    assert m.pbr == ORACLE_PBR
    assert m.excluded == ("PBL6",)
    assert "PBL6" in m.warnings[0]
    with pytest.raises(EmptyScores) as exc:
        compute_pbr(s, strict=True)
    assert exc.value.item_id == "PBL6"


def test_missing_pcl_always_fails(sprint):
    with pytest.raises(EmptyScores):
        compute_pbr(_sprint(*sprint.items, PblItem("PBL6", tar_scores=(TarScore("BC", "3"),))))


def test_empty_sprint():
    with pytest.raises(EmptySprint):
        compute_pbr(_sprint())


@pytest.mark.parametrize("value, band", [
    (Fraction("3.11"), B.MODERATE),
    (1, B.WORST), (2, B.BAD), (3, B.MODERATE), (4, B.GOOD), (5, B.EXCELLENT),
    (Decimal("3.50"), B.GOOD),
    (Fraction("3.49"), B.MODERATE),
    (Fraction("4.6"), B.EXCELLENT),
    (Fraction(1), B.WORST),
])
def test_interpret(value, band):
    assert interpret(value) is band


def test_band_labels():
    assert [b.label for b in B] == ["Worst", "Bad", "Moderate", "Good", "Excellent"]
    assert [int(b) for b in B] == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("value", [Fraction("0.99"), Fraction("5.01"), 0, 6])
def test_interpret_out_of_range(value):
    with pytest.raises(OutOfRange):
        interpret(value)


def _m(sid, pbr, day=1):
    pbr = Fraction(str(pbr))
    return SprintMetrics(sid, (), pbr, interpret(pbr), start_date=date(2024, 1, day))


def test_trend_summary():
    t = trend([_m("a", 3.0, 1), _m("b", 4.0, 2), _m("c", 3.5, 3)])
    assert [p.sprint_id for p in t.points] == ["a", "b", "c"]
    assert t.delta == Fraction(1, 2)
    assert t.mean == Fraction(7, 2)
    assert (t.minimum, t.maximum) == (3, 4)


def test_trend_single_and_errors(sprint):
    m = compute_pbr(sprint)
    t = trend([m])
    assert t.delta == 0
    assert [(p.sprint_id, p.pbr, p.band) for p in t.points] == [("S-case-study", ORACLE_PBR, B.GOOD)]
    with pytest.raises(EmptySeries):
        trend([])
    with pytest.raises(ValueError):
        trend([_m("b", 3, 5), _m("a", 3, 1)])


@pytest.mark.parametrize("per_team, order", [
    ({"A": [4.0], "B": [3.0]}, ["A", "B"]),
    ({"B": [4.0], "A": [3.0]}, ["B", "A"]),
    ({"B": [3.0], "A": [3.0]}, ["A", "B"]),
    ({"A": [2, 4], "B": [3, 3]}, ["A", "B"]),
])
def test_compare_teams(per_team, order):
    table = compare_teams({t: [_m(f"{t}{i}", v, i + 1) for i, v in enumerate(vs)] for t, vs in per_team.items()})
    assert [r.team_id for r in table] == order


def test_compare_teams_fields_and_errors():
    table = compare_teams({"A": [_m("a1", 2), _m("a2", 4.5, 2)]})
    row = table[0]
    assert row.latest_pbr == Fraction("4.5")
    assert row.mean_pbr == Fraction("3.25")
    assert row.band is B.MODERATE
    with pytest.raises(EmptyInput):
        compare_teams({})
    with pytest.raises(EmptyInput):
        compare_teams({"A": []})


@pytest.mark.parametrize("name", sorted(PROPERTIES))
def test_property(name):
    strategy, check = PROPERTIES[name]
    given(strategy)(check)()
