"""Domain types, the built-in factor catalog and validation rules.

Every value here is an immutable dataclass. Ratings and weights are held as
``Decimal`` so that the stored two-digit values survive unchanged; all metric
arithmetic downstream converts them to ``Fraction``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from decimal import ROUND_DOWN, Decimal, InvalidOperation
from enum import Enum
from typing import Iterable, Union

DecimalLike = Union[Decimal, str, int, float]

RATING_MIN = Decimal(1)
RATING_MAX = Decimal(5)
WEIGHT_MAX = Decimal(1)
RESOLUTION_EXP = -2
TASK_ESTIMATES = (3, 6)
SPRINT_MIN_DAYS = 5
SPRINT_MAX_DAYS = 30

_FACTOR_ID = re.compile(r"^[A-Z]{2,6}$")


def to_decimal(value: DecimalLike) -> Decimal:
    """Coerce user input to a Decimal without going through binary floats."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        value = repr(value)
    try:
        return Decimal(str(value).strip())
    except InvalidOperation:
        raise ValueError(f"not a decimal number: {value!r}") from None


def has_resolution(value: Decimal) -> bool:
    """True if ``value`` has at most two fractional digits."""
    return value.is_finite() and value == value.quantize(Decimal(1).scaleb(RESOLUTION_EXP), rounding=ROUND_DOWN)


class FactorKind(str, Enum):
    PCL = "PCL"
    TAR = "TAR"


class TaskStatus(str, Enum):
    NOT_DONE = "not_done"
    IN_PROGRESS = "in_progress"
    IN_REVIEW = "in_review"
    QUALITY_ASSURANCE = "quality_assurance"
    DONE = "done"

    @property
    def label(self) -> str:
        return self.value.replace("_", " ")

    @classmethod
    def parse(cls, text: str) -> "TaskStatus":
        key = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"qa": cls.QUALITY_ASSURANCE, "todo": cls.NOT_DONE}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown status {text!r} (expected one of: {names})") from None


@dataclass(frozen=True)
class FactorDefinition:
    id: str
    kind: FactorKind
    name: str
    description: str = ""


@dataclass(frozen=True)
class FactorCatalog:
    pcl_factors: tuple[FactorDefinition, ...]
    tar_factors: tuple[FactorDefinition, ...]

    def __post_init__(self):
        object.__setattr__(self, "pcl_factors", tuple(self.pcl_factors))
        object.__setattr__(self, "tar_factors", tuple(self.tar_factors))
        if not self.pcl_factors or not self.tar_factors:
            raise ValueError("a catalog needs at least one PCL and one TAR factor")
        seen: set[str] = set()
        for kind, group in ((FactorKind.PCL, self.pcl_factors), (FactorKind.TAR, self.tar_factors)):
            for f in group:
                if f.kind is not kind:
                    raise ValueError(f"factor {f.id} listed under {kind.value} but has kind {f.kind.value}")
                if not _FACTOR_ID.match(f.id):
                    raise ValueError(f"factor id {f.id!r} must be 2-6 uppercase letters")
                if f.id in seen:
                    raise ValueError(f"duplicate factor id {f.id}")
                seen.add(f.id)

    def get(self, factor_id: str) -> FactorDefinition | None:
        for f in self.pcl_factors + self.tar_factors:
            if f.id == factor_id:
                return f
        return None

    def ids(self, kind: FactorKind) -> list[str]:
        group = self.pcl_factors if kind is FactorKind.PCL else self.tar_factors
        return [f.id for f in group]

    def extend(self, factor: FactorDefinition) -> "FactorCatalog":
        """Return a new catalog with ``factor`` appended to its kind's list."""
        if self.get(factor.id) is not None:
            raise ValueError(f"factor id {factor.id} already exists in the catalog")
        if factor.kind is FactorKind.PCL:
            return FactorCatalog(self.pcl_factors + (factor,), self.tar_factors)
        return FactorCatalog(self.pcl_factors, self.tar_factors + (factor,))


_PCL_DEFAULTS = (
    ("CBLBP", "Complexity of Business Logic of the PBL",
     "How much business logic the item carries; assessed by counting validations and "
     "if-else style conditions in the requirement, or by sketching a flowchart of it."),
    ("NTD", "Necessity of Test Data",
     "Volume and complexity of the positive and negative test data, the configuration and "
     "pre-steps it needs, whether it is generated by hand, and how reusable it is."),
    ("TE", "Test Estimation",
     "Estimated testing effort in man-days from any estimation technique; larger "
     "estimates earn a higher rating."),
    ("PID", "PBL item Inter-dependency",
     "Coupling between the tasks of one item, from independent tasks up to tasks whose "
     "development ripples into other tasks."),
    ("PED", "PBL item External-dependency",
     "Coupling between this item and other backlog items; dependent items are hard to "
     "declare tested, propagate bugs and share test cases."),
    ("TEC", "Test Execution Complexity",
     "Effort of running the tests themselves: concurrency, deadlines, precise output "
     "checks, slow output generation, log analysis, many steps, costly cleanup."),
    ("LGUI", "Logic on Graphical User Interface (GUI)",
     "Business rules surfaced in the GUI, which add validations and cross-browser, "
     "cross-platform test work."),
    ("BA", "Bug Assumptions",
     "Expected bugs inferred from the historical bug record of the features the item "
     "touches; bug-prone features need more testing."),
)

_TAR_DEFAULTS = (
    ("BC", "Bugs Count",
     "Bugs found through the pre-written test cases; more bugs found means a higher rating."),
    ("SB", "Severity of the Bugs",
     "Weight of the bugs found by impact, since a count of minor bugs says little."),
    ("BFRI", "Bug Fixing Ripple Impact",
     "Share of tests that had to be rerun because fixes broke other components; heavy "
     "ripple lowers the rating."),
    ("NBMTC", "Number of Bugs Missed by the Test case",
     "How many and how severe the bugs were that surfaced outside the written test cases."),
    ("RC", "Requirement Changes",
     "Amount and lateness of requirement changes during the sprint; many or late changes "
     "lower the rating."),
    ("TC", "Test Confidence",
     "The QA engineer's own confidence that testing was sufficient. Subjective; may be "
     "left unscored."),
)

OPTIONAL_FACTORS = (
    FactorDefinition(
        "DMC", FactorKind.PCL, "Data Migration Complexity",
        "Testing hazards of migrating user data to a new data model: dropped or added "
        "features, GUI-level checks, cascaded migrations, untransformable records."),
    FactorDefinition(
        "TPS", FactorKind.PCL, "3rd Party Support / External Interface Integration",
        "Black-box third-party components or external interfaces that must be tested "
        "from their inputs and outputs alone."),
)


def default_catalog() -> FactorCatalog:
    """The eight PCL and six TAR factors used by the case-study tables."""
    return FactorCatalog(
        tuple(FactorDefinition(i, FactorKind.PCL, n, d) for i, n, d in _PCL_DEFAULTS),
        tuple(FactorDefinition(i, FactorKind.TAR, n, d) for i, n, d in _TAR_DEFAULTS),
    )


@dataclass(frozen=True)
class PclScore:
    factor_id: str
    value: Decimal
    weight: Decimal

    def __post_init__(self):
        object.__setattr__(self, "value", to_decimal(self.value))
        object.__setattr__(self, "weight", to_decimal(self.weight))


@dataclass(frozen=True)
class TarScore:
    factor_id: str
    value: Decimal

    def __post_init__(self):
        object.__setattr__(self, "value", to_decimal(self.value))


@dataclass(frozen=True)
class ScoreRevision:
    """A superseded score, kept when a factor is re-rated."""

    kind: FactorKind
    factor_id: str
    value: Decimal
    weight: Decimal | None = None

    def __post_init__(self):
        object.__setattr__(self, "value", to_decimal(self.value))
        if self.weight is not None:
            object.__setattr__(self, "weight", to_decimal(self.weight))


@dataclass(frozen=True)
class PblItem:
    id: str
    title: str = ""
    story: str = ""
    pcl_scores: tuple[PclScore, ...] = ()
    tar_scores: tuple[TarScore, ...] = ()
    revisions: tuple[ScoreRevision, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pcl_scores", tuple(self.pcl_scores))
        object.__setattr__(self, "tar_scores", tuple(self.tar_scores))
        object.__setattr__(self, "revisions", tuple(self.revisions))

    def rate_pcl(self, factor_id: str, value: DecimalLike, weight: DecimalLike) -> "PblItem":
        """Upsert a PCL score; an overwritten score moves to ``revisions``."""
        new = PclScore(factor_id, value, weight)
        revisions = self.revisions
        scores = []
        for s in self.pcl_scores:
            if s.factor_id == factor_id:
                revisions += (ScoreRevision(FactorKind.PCL, s.factor_id, s.value, s.weight),)
                scores.append(new)
                new = None
            else:
                scores.append(s)
        if new is not None:
            scores.append(new)
        return replace(self, pcl_scores=tuple(scores), revisions=revisions)

    def rate_tar(self, factor_id: str, value: DecimalLike) -> "PblItem":
        new = TarScore(factor_id, value)
        revisions = self.revisions
        scores = []
        for s in self.tar_scores:
            if s.factor_id == factor_id:
                revisions += (ScoreRevision(FactorKind.TAR, s.factor_id, s.value),)
                scores.append(new)
                new = None
            else:
                scores.append(s)
        if new is not None:
            scores.append(new)
        return replace(self, tar_scores=tuple(scores), revisions=revisions)


@dataclass(frozen=True)
class TaskEvent:
    task_id: str
    day_index: int
    from_status: TaskStatus
    to_status: TaskStatus
    actor: str = ""


@dataclass(frozen=True)
class Task:
    """A timeboxed unit of work on one backlog item.

    ``status`` is not stored separately: it is the target of the last event in
    ``history``, so the two can never disagree. ``added_day`` marks tasks that
    joined the sprint after day 0.
    """

    id: str
    pbl_item_id: str
    description: str = ""
    estimate_hours: int = 6
    testable: bool = True
    history: tuple[TaskEvent, ...] = ()
    added_day: int = 0

    def __post_init__(self):
        object.__setattr__(self, "history", tuple(self.history))

    @property
    def status(self) -> TaskStatus:
        return self.history[-1].to_status if self.history else TaskStatus.NOT_DONE


@dataclass(frozen=True)
class Sprint:
    id: str
    team_id: str
    start_date: date
    length_days: int
    items: tuple[PblItem, ...] = ()
    tasks: tuple[Task, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "tasks", tuple(self.tasks))

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=self.length_days - 1)

    def item(self, item_id: str) -> PblItem | None:
        return next((i for i in self.items if i.id == item_id), None)

    def task(self, task_id: str) -> Task | None:
        return next((t for t in self.tasks if t.id == task_id), None)

    def with_item(self, item: PblItem) -> "Sprint":
        """Replace the item with the same id, or append it."""
        if self.item(item.id) is None:
            return replace(self, items=self.items + (item,))
        return replace(self, items=tuple(item if i.id == item.id else i for i in self.items))

    def with_task(self, task: Task) -> "Sprint":
        if self.task(task.id) is None:
            return replace(self, tasks=self.tasks + (task,))
        return replace(self, tasks=tuple(task if t.id == task.id else t for t in self.tasks))


@dataclass(frozen=True)
class Team:
    id: str
    name: str = ""
    sprint_ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sprint_ids", tuple(self.sprint_ids))


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> list[str]:
        return [str(v) for v in self.violations]


def _check_rating(value: Decimal, where: str) -> Iterable[Violation]:
    if not value.is_finite() or not (RATING_MIN <= value <= RATING_MAX):
        yield Violation(where, f"rating out of range [1,5]: {value}")
    elif not has_resolution(value):
        yield Violation(where, f"rating {value} is finer than 0.01")


def _check_weight(value: Decimal, where: str) -> Iterable[Violation]:
    if not value.is_finite() or not (0 < value <= WEIGHT_MAX):
        yield Violation(where, f"weight out of range (0,1]: {value}")
    elif not has_resolution(value):
        yield Violation(where, f"weight {value} is finer than 0.01")


def _item_violations(item: PblItem, catalog: FactorCatalog) -> list[Violation]:
    out: list[Violation] = []
    seen: set[str] = set()
    for s in item.pcl_scores:
        where = f"{item.id}/{s.factor_id}"
        factor = catalog.get(s.factor_id)
        if factor is None:
            out.append(Violation(where, "unknown factor"))
        elif factor.kind is not FactorKind.PCL:
            out.append(Violation(where, "factor is not a PCL factor"))
        if s.factor_id in seen:
            out.append(Violation(where, "duplicate PCL score"))
        seen.add(s.factor_id)
        out.extend(_check_rating(s.value, where))
        out.extend(_check_weight(s.weight, where))
    seen.clear()
    for s in item.tar_scores:
        where = f"{item.id}/{s.factor_id}"
        factor = catalog.get(s.factor_id)
        if factor is None:
            out.append(Violation(where, "unknown factor"))
        elif factor.kind is not FactorKind.TAR:
            out.append(Violation(where, "factor is not a TAR factor"))
        if s.factor_id in seen:
            out.append(Violation(where, "duplicate TAR score"))
        seen.add(s.factor_id)
        out.extend(_check_rating(s.value, where))
    return out


def validate_item(item: PblItem, catalog: FactorCatalog) -> ValidationResult:
    return ValidationResult(tuple(_item_violations(item, catalog)))


def validate_sprint(sprint: Sprint, catalog: FactorCatalog) -> ValidationResult:
    """Check every item plus the sprint- and task-level invariants."""
    # local import: workflow depends on this module
    from pbr.workflow import replay_errors

    out: list[Violation] = []
    if not (SPRINT_MIN_DAYS <= sprint.length_days <= SPRINT_MAX_DAYS):
        out.append(Violation(
            sprint.id,
            f"sprint length {sprint.length_days} days outside {SPRINT_MIN_DAYS}-{SPRINT_MAX_DAYS} day bound"))
    item_ids: set[str] = set()
    for item in sprint.items:
        if item.id in item_ids:
            out.append(Violation(item.id, "duplicate item id"))
        item_ids.add(item.id)
        out.extend(_item_violations(item, catalog))
    task_ids: set[str] = set()
    for task in sprint.tasks:
        if task.id in task_ids:
            out.append(Violation(task.id, "duplicate task id"))
        task_ids.add(task.id)
        if task.pbl_item_id not in item_ids and sprint.item(task.pbl_item_id) is None:
            out.append(Violation(task.id, f"dangling pbl_item_id {task.pbl_item_id!r}"))
        if task.estimate_hours not in TASK_ESTIMATES:
            out.append(Violation(task.id, f"estimate {task.estimate_hours}h is not 3 or 6"))
        if not (0 <= task.added_day < sprint.length_days):
            out.append(Violation(task.id, f"added_day {task.added_day} outside the sprint"))
        out.extend(Violation(task.id, msg) for msg in replay_errors(task, sprint.length_days))
    return ValidationResult(tuple(out))
