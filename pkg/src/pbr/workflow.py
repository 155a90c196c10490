"""Dashboard task state machine and burndown series."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from pbr.model import Sprint, Task, TaskEvent, TaskStatus

S = TaskStatus


class Condition(str, Enum):
    ANY = "any"
    TESTABLE = "testable"
    NOT_TESTABLE = "not_testable"


@dataclass(frozen=True)
class Transition:
    source: TaskStatus
    target: TaskStatus
    condition: Condition = Condition.ANY
    forward: bool = True

    def allows(self, task: Task) -> bool:
        if self.condition is Condition.TESTABLE:
            return task.testable
        if self.condition is Condition.NOT_TESTABLE:
            return not task.testable
        return True


_FORWARD = (
    Transition(S.NOT_DONE, S.IN_PROGRESS),
    Transition(S.IN_PROGRESS, S.IN_REVIEW),
    Transition(S.IN_REVIEW, S.QUALITY_ASSURANCE, Condition.TESTABLE),
    Transition(S.QUALITY_ASSURANCE, S.DONE),
    Transition(S.IN_REVIEW, S.DONE, Condition.NOT_TESTABLE),
)
# QA sends a task back when it finds bugs
REOPEN = Transition(S.QUALITY_ASSURANCE, S.IN_PROGRESS, forward=False)


class WorkflowError(Exception):
    pass


class IllegalTransition(WorkflowError):
    def __init__(self, task: Task, source: TaskStatus, target: TaskStatus, allow_reopen: bool = True):
        self.task_id = task.id
        self.source = source
        self.target = target
        self.legal_next = next_statuses(task, allow_reopen)
        hint = ", ".join(s.label for s in self.legal_next) or "none (terminal)"
        super().__init__(
            f"illegal transition {source.label!r} -> {target.label!r} for task {task.id}; "
            f"legal next: {hint}")


class StaleFromStatus(WorkflowError):
    def __init__(self, task: Task, claimed: TaskStatus):
        self.task_id = task.id
        self.claimed = claimed
        self.actual = task.status
        super().__init__(
            f"task {task.id} is {task.status.label!r}, not {claimed.label!r}")


class InvalidHistory(WorkflowError):
    def __init__(self, task_id: str, reason: str):
        self.task_id = task_id
        super().__init__(f"task {task_id}: {reason}")


def legal_transitions(allow_reopen: bool = True) -> frozenset[Transition]:
    return frozenset(_FORWARD + ((REOPEN,) if allow_reopen else ()))


def next_statuses(task: Task, allow_reopen: bool = True) -> list[TaskStatus]:
    order = list(TaskStatus)
    found = {t.target for t in legal_transitions(allow_reopen) if t.source is task.status and t.allows(task)}
    return sorted(found, key=order.index)


def is_legal(task: Task, source: TaskStatus, target: TaskStatus, allow_reopen: bool = True) -> bool:
    return any(
        t.source is source and t.target is target and t.allows(task)
        for t in legal_transitions(allow_reopen)
    )


def apply_event(task: Task, event: TaskEvent, allow_reopen: bool = True) -> Task:
    """Return ``task`` with ``event`` appended to its history."""
    if event.task_id != task.id:
        raise ValueError(f"event for task {event.task_id} applied to task {task.id}")
    if event.from_status is not task.status:
        raise StaleFromStatus(task, event.from_status)
    if not is_legal(task, event.from_status, event.to_status, allow_reopen):
        raise IllegalTransition(task, event.from_status, event.to_status, allow_reopen)
    return replace(task, history=task.history + (event,))


def replay(task: Task, allow_reopen: bool = True) -> Task:
    """Fold the task's history onto a blank copy, raising on the first bad event."""
    blank = replace(task, history=())
    for ev in task.history:
        blank = apply_event(blank, ev, allow_reopen)
    return blank


def replay_errors(task: Task, length_days: int | None = None, allow_reopen: bool = True) -> list[str]:
    errors = []
    try:
        replay(task, allow_reopen)
    except WorkflowError as exc:
        errors.append(f"invalid history: {exc}")
    prev = task.added_day
    for ev in task.history:
        if ev.day_index < prev:
            errors.append(f"invalid history: event on day {ev.day_index} precedes day {prev}")
            break
        if length_days is not None and ev.day_index >= length_days:
            errors.append(f"invalid history: event on day {ev.day_index} beyond sprint length {length_days}")
            break
        prev = ev.day_index
    return errors


@dataclass(frozen=True)
class BurndownSeries:
    points: tuple[tuple[int, int], ...]

    @property
    def days(self) -> list[int]:
        return [d for d, _ in self.points]

    @property
    def remaining(self) -> list[int]:
        return [h for _, h in self.points]


def _done_day(task: Task) -> int | None:
    for ev in task.history:
        if ev.to_status is TaskStatus.DONE:
            return ev.day_index
    return None


def burndown(sprint: Sprint, allow_reopen: bool = True) -> BurndownSeries:
    """Remaining estimated hours at the end of each sprint day.

    A task counts from its ``added_day`` until the day it reaches Done.
    """
    for task in sprint.tasks:
        errors = replay_errors(task, sprint.length_days, allow_reopen)
        if errors:
            raise InvalidHistory(task.id, errors[0].removeprefix("invalid history: "))
    spans = [(t.added_day, _done_day(t), t.estimate_hours) for t in sprint.tasks]
    points = []
    for day in range(sprint.length_days):
        remaining = sum(
            hours for added, done, hours in spans
            if added <= day and (done is None or done > day)
        )
        points.append((day, remaining))
    return BurndownSeries(tuple(points))
