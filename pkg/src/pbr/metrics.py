"""PCL, TAR and PBR computation, interpretation bands, trends and team comparison.

All arithmetic is exact (``fractions.Fraction``). Display values truncate
toward zero at two decimals; nothing else is ever rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from enum import IntEnum
from fractions import Fraction
from typing import Mapping, Sequence

from pbr.model import PblItem, Sprint

_ONE = Fraction(1)
_FIVE = Fraction(5)


class MetricError(Exception):
    pass


class EmptyScores(MetricError):
    def __init__(self, item_id: str, kind: str):
        self.item_id = item_id
        self.kind = kind
        super().__init__(f"item {item_id} has no {kind} scores")


class EmptySprint(MetricError):
    pass


class OutOfRange(MetricError):
    pass


class EmptySeries(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class InterpretationBand(IntEnum):
    WORST = 1
    BAD = 2
    MODERATE = 3
    GOOD = 4
    EXCELLENT = 5

    @property
    def label(self) -> str:
        return self.name.capitalize()


def truncate2(value: Fraction) -> Decimal:
    """Truncate toward zero to two decimals: 3.4167 -> 3.41, 3.7083 -> 3.70."""
    hundredths = math.trunc(value * 100)
    return Decimal(hundredths).scaleb(-2)


def compute_pcl(item: PblItem) -> Fraction:
    """Weighted mean of the item's PCL factor values."""
    if not item.pcl_scores:
        raise EmptyScores(item.id, "PCL")
    weighted = sum((Fraction(s.value) * Fraction(s.weight) for s in item.pcl_scores), Fraction(0))
    total_weight = sum((Fraction(s.weight) for s in item.pcl_scores), Fraction(0))
    if total_weight == 0:
        raise ValueError(f"item {item.id}: PCL weights sum to zero")
    return weighted / total_weight


def compute_tar(item: PblItem) -> Fraction:
    """Plain mean over the TAR factors that have been scored for this item."""
    if not item.tar_scores:
        raise EmptyScores(item.id, "TAR")
    return sum((Fraction(s.value) for s in item.tar_scores), Fraction(0)) / len(item.tar_scores)


@dataclass(frozen=True)
class ItemMetrics:
    item_id: str
    pcl: Fraction
    tar: Fraction

    @property
    def pcl_display(self) -> Decimal:
        return truncate2(self.pcl)

    @property
    def tar_display(self) -> Decimal:
        return truncate2(self.tar)


@dataclass(frozen=True)
class SprintMetrics:
    sprint_id: str
    items: tuple[ItemMetrics, ...]
    pbr: Fraction
    band: InterpretationBand
    team_id: str = ""
    start_date: date | None = None
    end_date: date | None = None
    excluded: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def pbr_display(self) -> Decimal:
        return truncate2(self.pbr)


def interpret(pbr: Fraction | Decimal | int) -> InterpretationBand:
    """Map a score in [1, 5] to its band: round half up, then look up."""
    value = Fraction(pbr)
    if not (_ONE <= value <= _FIVE):
        raise OutOfRange(f"PBR {float(value):.4f} outside [1,5]")
    rounded = math.floor(value + Fraction(1, 2))
    return InterpretationBand(min(5, max(1, rounded)))


def compute_pbr(sprint: Sprint, strict: bool = False) -> SprintMetrics:
    """PCL-weighted mean of item TARs over the sprint.

    Items without any TAR score are left out with a warning, unless
    ``strict`` is set, in which case ``EmptyScores`` is raised for them.
    """
    if not sprint.items:
        raise EmptySprint(f"sprint {sprint.id} has no items")
    rows: list[ItemMetrics] = []
    excluded: list[str] = []
    warnings: list[str] = []
    for item in sprint.items:
        pcl = compute_pcl(item)
        if not item.tar_scores and not strict:
            excluded.append(item.id)
            warnings.append(f"item {item.id} excluded from PBR: no TAR scores yet")
            continue
        rows.append(ItemMetrics(item.id, pcl, compute_tar(item)))
    if not rows:
        raise EmptySprint(f"sprint {sprint.id} has no items with TAR scores")
    numerator = sum((r.pcl * r.tar for r in rows), Fraction(0))
    denominator = sum((r.pcl for r in rows), Fraction(0))
    pbr = numerator / denominator
    return SprintMetrics(
        sprint_id=sprint.id,
        items=tuple(rows),
        pbr=pbr,
        band=interpret(pbr),
        team_id=sprint.team_id,
        start_date=sprint.start_date,
        end_date=sprint.end_date,
        excluded=tuple(excluded),
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class TrendPoint:
    sprint_id: str
    pbr: Fraction
    band: InterpretationBand


@dataclass(frozen=True)
class Trend:
    points: tuple[TrendPoint, ...]
    minimum: Fraction
    maximum: Fraction
    mean: Fraction
    delta: Fraction


def trend(metrics: Sequence[SprintMetrics]) -> Trend:
    if not metrics:
        raise EmptySeries("trend needs at least one sprint")
    dates = [m.start_date for m in metrics]
    if all(d is not None for d in dates) and dates != sorted(dates):
        raise ValueError("sprint metrics must be ordered by start date")
    values = [m.pbr for m in metrics]
    return Trend(
        points=tuple(TrendPoint(m.sprint_id, m.pbr, m.band) for m in metrics),
        minimum=min(values),
        maximum=max(values),
        mean=sum(values, Fraction(0)) / len(values),
        delta=values[-1] - values[0],
    )


@dataclass(frozen=True)
class TeamRow:
    team_id: str
    latest_pbr: Fraction
    mean_pbr: Fraction
    band: InterpretationBand
    sprints: int


def compare_teams(per_team: Mapping[str, Sequence[SprintMetrics]]) -> list[TeamRow]:
    """One row per team, best mean PBR first; ties go to the smaller team id.

    ``band`` interprets the mean, the value the table is ranked by.
    """
    if not per_team:
        raise EmptyInput("no teams to compare")
    rows = []
    for team_id, series in per_team.items():
        if not series:
            raise EmptyInput(f"team {team_id} has no sprint metrics")
        mean = sum((m.pbr for m in series), Fraction(0)) / len(series)
        rows.append(TeamRow(team_id, series[-1].pbr, mean, interpret(mean), len(series)))
    rows.sort(key=lambda r: (-r.mean_pbr, r.team_id))
    return rows
