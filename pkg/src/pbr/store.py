"""File-backed repository of catalogs, teams, sprints and task event logs.

Layout under the repository root::

    VERSION                    schema version, a single integer
    catalog.json               factor catalog
    teams/<team-id>.json
    sprints/<sprint-id>.json   items, scores and tasks (without history)
    events/<sprint-id>.ndjson  append-only task events, one JSON object per line

JSON files are canonical: sorted keys, 2-space indent, LF endings, decimals
as strings with no trailing zeros. Saving what was loaded reproduces the
file byte for byte.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import os
import re
import tempfile
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterator

from pbr.metrics import MetricError, SprintMetrics, compute_pbr
from pbr.model import (
    FactorCatalog,
    FactorDefinition,
    FactorKind,
    PblItem,
    PclScore,
    ScoreRevision,
    Sprint,
    TarScore,
    Task,
    TaskEvent,
    TaskStatus,
    Team,
    default_catalog,
    validate_sprint,
)
from pbr.workflow import InvalidHistory, apply_event

SCHEMA_VERSION = 1

_ENTITY_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")


class StoreError(Exception):
    pass


class AlreadyInitialized(StoreError):
    pass


class NotFound(StoreError):
    pass


class SchemaMismatch(StoreError):
    pass


class IoFailure(StoreError):
    pass


class LogConflict(StoreError):
    """The sprint's task histories would require rewriting the event log."""


class ValidationFailed(StoreError):
    def __init__(self, what: str, violations: list[str]):
        self.violations = violations
        super().__init__(f"{what} failed validation: " + "; ".join(violations))


# -- canonical encoding -------------------------------------------------------

def format_decimal(value: Decimal) -> str:
    """Shortest exact rendering: 0.40 -> "0.4", 5.00 -> "5"."""
    text = format(value.normalize(), "f")
    return "0" if text in ("-0", "") else text


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def event_line(event: TaskEvent) -> str:
    return json.dumps({
        "actor": event.actor,
        "day": event.day_index,
        "from": event.from_status.value,
        "schema_version": SCHEMA_VERSION,
        "task_id": event.task_id,
        "to": event.to_status.value,
    }, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"


def catalog_to_dict(catalog: FactorCatalog) -> dict:
    def enc(f: FactorDefinition) -> dict:
        return {"id": f.id, "kind": f.kind.value, "name": f.name, "description": f.description}

    return {
        "schema_version": SCHEMA_VERSION,
        "pcl_factors": [enc(f) for f in catalog.pcl_factors],
        "tar_factors": [enc(f) for f in catalog.tar_factors],
    }


def catalog_from_dict(data: dict) -> FactorCatalog:
    _check_version(data, "catalog")

    def dec(d: dict) -> FactorDefinition:
        return FactorDefinition(d["id"], FactorKind(d["kind"]), d["name"], d.get("description", ""))

    return FactorCatalog(
        tuple(dec(d) for d in data["pcl_factors"]),
        tuple(dec(d) for d in data["tar_factors"]),
    )


def team_to_dict(team: Team) -> dict:
    return {"schema_version": SCHEMA_VERSION, "id": team.id, "name": team.name,
            "sprint_ids": list(team.sprint_ids)}


def team_from_dict(data: dict) -> Team:
    _check_version(data, "team")
    return Team(data["id"], data.get("name", ""), tuple(data.get("sprint_ids", ())))


def _item_to_dict(item: PblItem) -> dict:
    revisions = []
    for r in item.revisions:
        rev = {"kind": r.kind.value, "factor_id": r.factor_id, "value": format_decimal(r.value)}
        if r.weight is not None:
            rev["weight"] = format_decimal(r.weight)
        revisions.append(rev)
    return {
        "id": item.id,
        "title": item.title,
        "story": item.story,
        "pcl_scores": [
            {"factor_id": s.factor_id, "value": format_decimal(s.value), "weight": format_decimal(s.weight)}
            for s in item.pcl_scores
        ],
        "tar_scores": [{"factor_id": s.factor_id, "value": format_decimal(s.value)} for s in item.tar_scores],
        "revisions": revisions,
    }


def _item_from_dict(d: dict) -> PblItem:
    return PblItem(
        id=d["id"],
        title=d.get("title", ""),
        story=d.get("story", ""),
        pcl_scores=tuple(PclScore(s["factor_id"], Decimal(s["value"]), Decimal(s["weight"]))
                         for s in d.get("pcl_scores", ())),
        tar_scores=tuple(TarScore(s["factor_id"], Decimal(s["value"])) for s in d.get("tar_scores", ())),
        revisions=tuple(
            ScoreRevision(FactorKind(r["kind"]), r["factor_id"], Decimal(r["value"]),
                          Decimal(r["weight"]) if "weight" in r else None)
            for r in d.get("revisions", ())
        ),
    )


def sprint_to_dict(sprint: Sprint) -> dict:
    """Sprint file content; task histories are kept in the event log instead."""
    return {
        "schema_version": SCHEMA_VERSION,
        "id": sprint.id,
        "team_id": sprint.team_id,
        "start_date": sprint.start_date.isoformat(),
        "length_days": sprint.length_days,
        "items": [_item_to_dict(i) for i in sprint.items],
        "tasks": [
            {
                "id": t.id,
                "pbl_item_id": t.pbl_item_id,
                "description": t.description,
                "estimate_hours": t.estimate_hours,
                "testable": t.testable,
                "added_day": t.added_day,
            }
            for t in sprint.tasks
        ],
    }


def sprint_from_dict(data: dict, events: list[TaskEvent] = ()) -> Sprint:
    _check_version(data, "sprint")
    histories: dict[str, list[TaskEvent]] = {}
    for ev in events:
        histories.setdefault(ev.task_id, []).append(ev)
    tasks = []
    for t in data.get("tasks", ()):
        tasks.append(Task(
            id=t["id"],
            pbl_item_id=t["pbl_item_id"],
            description=t.get("description", ""),
            estimate_hours=t["estimate_hours"],
            testable=t.get("testable", True),
            history=tuple(histories.pop(t["id"], ())),
            added_day=t.get("added_day", 0),
        ))
    if histories:
        raise LogConflict(f"event log of sprint {data['id']} names unknown tasks: {sorted(histories)}")
    return Sprint(
        id=data["id"],
        team_id=data["team_id"],
        start_date=date.fromisoformat(data["start_date"]),
        length_days=data["length_days"],
        items=tuple(_item_from_dict(i) for i in data.get("items", ())),
        tasks=tuple(tasks),
    )


def event_from_dict(d: dict) -> TaskEvent:
    _check_version(d, "event")
    return TaskEvent(d["task_id"], d["day"], TaskStatus(d["from"]), TaskStatus(d["to"]), d.get("actor", ""))


def _check_version(data: dict, what: str) -> None:
    version = data.get("schema_version")
    if not isinstance(version, int):
        raise SchemaMismatch(f"{what} has no integer schema_version")
    if version > SCHEMA_VERSION:
        raise SchemaMismatch(f"{what} uses schema version {version}; this build supports up to {SCHEMA_VERSION}")


def _check_id(kind: str, entity_id: str) -> None:
    if not _ENTITY_ID.match(entity_id):
        raise ValidationFailed(kind, [f"id {entity_id!r} must be 1-64 of [A-Za-z0-9._-], not starting with . _ or -"])


# -- repository ---------------------------------------------------------------

@dataclass
class Repository:
    root: Path
    _lock_depth: int = 0
    _lock_fd: int = -1

    @property
    def catalog_path(self) -> Path:
        return self.root / "catalog.json"

    def team_path(self, team_id: str) -> Path:
        return self.root / "teams" / f"{team_id}.json"

    def sprint_path(self, sprint_id: str) -> Path:
        return self.root / "sprints" / f"{sprint_id}.json"

    def events_path(self, sprint_id: str) -> Path:
        return self.root / "events" / f"{sprint_id}.ndjson"

    @classmethod
    def init(cls, root: str | os.PathLike, catalog: FactorCatalog | None = None) -> "Repository":
        root = Path(root)
        if (root / "VERSION").exists():
            raise AlreadyInitialized(f"{root} is already a repository")
        try:
            if root.exists() and any(root.iterdir()):
                raise AlreadyInitialized(f"{root} is not empty")
            for sub in ("teams", "sprints", "events"):
                (root / sub).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoFailure(f"cannot create repository at {root}: {exc}") from exc
        repo = cls(root)
        with repo.write_lock():
            repo._write_atomic(repo.catalog_path, canonical_json(catalog_to_dict(catalog or default_catalog())))
            repo._write_atomic(root / "VERSION", f"{SCHEMA_VERSION}\n")
        return repo

    @classmethod
    def open(cls, root: str | os.PathLike) -> "Repository":
        root = Path(root)
        version_file = root / "VERSION"
        if not version_file.is_file():
            raise NotFound(f"no repository at {root} (missing VERSION)")
        try:
            text = version_file.read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        if not text.isdigit():
            raise SchemaMismatch(f"unreadable VERSION {text!r}")
        if int(text) > SCHEMA_VERSION:
            raise SchemaMismatch(f"repository schema version {text}; this build supports up to {SCHEMA_VERSION}")
        return cls(root)

    # locking and raw io

    @contextlib.contextmanager
    def write_lock(self) -> Iterator[None]:
        """Advisory single-writer lock on ``<root>/.lock``; reentrant per instance."""
        if self._lock_depth == 0:
            try:
                self._lock_fd = os.open(self.root / ".lock", os.O_RDWR | os.O_CREAT, 0o644)
                fcntl.flock(self._lock_fd, fcntl.LOCK_EX)
            except OSError as exc:
                raise IoFailure(f"cannot lock {self.root}: {exc}") from exc
        self._lock_depth += 1
        try:
            yield
        finally:
            self._lock_depth -= 1
            if self._lock_depth == 0:
                fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
                os.close(self._lock_fd)
                self._lock_fd = -1

    def _write_atomic(self, path: Path, text: str) -> None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, path)
            except BaseException:
                with contextlib.suppress(OSError):
                    os.unlink(tmp)
                raise
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc

    def _read_json(self, path: Path, what: str) -> dict:
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise NotFound(f"{what} not found") from None
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"{path} is not valid JSON: {exc}") from exc

    # catalog

    def load_catalog(self) -> FactorCatalog:
        return catalog_from_dict(self._read_json(self.catalog_path, "catalog"))

    def save_catalog(self, catalog: FactorCatalog) -> None:
        with self.write_lock():
            self._write_atomic(self.catalog_path, canonical_json(catalog_to_dict(catalog)))

    def add_factor(self, factor: FactorDefinition) -> FactorCatalog:
        with self.write_lock():
            try:
                catalog = self.load_catalog().extend(factor)
            except ValueError as exc:
                raise ValidationFailed(f"factor {factor.id}", [str(exc)]) from exc
            self.save_catalog(catalog)
            return catalog

    # teams

    def team_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "teams").glob("*.json"))

    def load_team(self, team_id: str) -> Team:
        _check_id("team", team_id)
        return team_from_dict(self._read_json(self.team_path(team_id), f"team {team_id}"))

    def save_team(self, team: Team) -> None:
        _check_id("team", team.id)
        with self.write_lock():
            self._write_atomic(self.team_path(team.id), canonical_json(team_to_dict(team)))

    # sprints

    def sprint_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "sprints").glob("*.json"))

    def load_events(self, sprint_id: str) -> list[TaskEvent]:
        path = self.events_path(sprint_id)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            return []
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc
        events = []
        for n, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                events.append(event_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise SchemaMismatch(f"{path}:{n}: bad event record: {exc}") from exc
        return events

    def load_sprint(self, sprint_id: str) -> Sprint:
        _check_id("sprint", sprint_id)
        data = self._read_json(self.sprint_path(sprint_id), f"sprint {sprint_id}")
        return sprint_from_dict(data, self.load_events(sprint_id))

    def save_sprint(self, sprint: Sprint) -> None:
        """Validate and write ``sprint``, appending any events the log lacks.

        The stored log for each task must be a prefix of that task's history;
        anything else would mean rewriting history and raises ``LogConflict``.
        """
        _check_id("sprint", sprint.id)
        with self.write_lock():
            result = validate_sprint(sprint, self.load_catalog())
            if not result.ok:
                raise ValidationFailed(f"sprint {sprint.id}", result.messages())
            team = self.load_team(sprint.team_id)
            path = self.sprint_path(sprint.id)
            if path.exists():
                previous = sprint_from_dict(self._read_json(path, f"sprint {sprint.id}"))
                if previous.team_id != sprint.team_id:
                    raise ValidationFailed(f"sprint {sprint.id}",
                                           [f"already belongs to team {previous.team_id}"])
            new_events = self._pending_events(sprint)
            self._write_atomic(path, canonical_json(sprint_to_dict(sprint)))
            for ev in new_events:
                self._append_line(sprint.id, event_line(ev))
            if sprint.id not in team.sprint_ids:
                self._register(team, sprint)

    def _pending_events(self, sprint: Sprint) -> list[TaskEvent]:
        stored: dict[str, list[TaskEvent]] = {}
        for ev in self.load_events(sprint.id):
            stored.setdefault(ev.task_id, []).append(ev)
        pending: list[tuple[int, int, int, TaskEvent]] = []
        for order, task in enumerate(sprint.tasks):
            have = stored.pop(task.id, [])
            if list(task.history[:len(have)]) != have:
                raise LogConflict(f"task {task.id}: stored history is not a prefix of the new history")
            for pos, ev in enumerate(task.history[len(have):], start=len(have)):
                pending.append((ev.day_index, order, pos, ev))
        if stored:
            raise LogConflict(f"sprint {sprint.id}: tasks with logged events were removed: {sorted(stored)}")
        pending.sort(key=lambda p: p[:3])
        return [p[3] for p in pending]

    def _register(self, team: Team, sprint: Sprint) -> None:
        starts = {sprint.id: sprint.start_date}
        for sid in team.sprint_ids:
            starts[sid] = date.fromisoformat(self._read_json(self.sprint_path(sid), f"sprint {sid}")["start_date"])
        ordered = sorted(starts, key=lambda sid: (starts[sid], sid))
        self._write_atomic(self.team_path(team.id), canonical_json(team_to_dict(
            Team(team.id, team.name, tuple(ordered)))))

    def _append_line(self, sprint_id: str, line: str) -> None:
        path = self.events_path(sprint_id)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise IoFailure(f"cannot append to {path}: {exc}") from exc

    def append_event(self, sprint_id: str, event: TaskEvent, allow_reopen: bool = True) -> int:
        """Apply ``event`` to the stored task and append it durably.

        Returns the event log length after the append. Workflow errors
        (``IllegalTransition``, ``StaleFromStatus``) leave the log untouched.
        """
        with self.write_lock():
            sprint = self.load_sprint(sprint_id)
            task = sprint.task(event.task_id)
            if task is None:
                raise NotFound(f"task {event.task_id} not found in sprint {sprint_id}")
            last_day = task.history[-1].day_index if task.history else task.added_day
            if not (last_day <= event.day_index < sprint.length_days):
                raise InvalidHistory(
                    task.id, f"day {event.day_index} must be in [{last_day}, {sprint.length_days - 1}]")
            apply_event(task, event, allow_reopen)
            self._append_line(sprint_id, event_line(event))
            return len(self.load_events(sprint_id))

    def load_history(self, team_id: str, strict: bool = False) -> list[tuple[Sprint, SprintMetrics | None]]:
        """The team's sprints by start date, each with freshly computed metrics.

        A sprint with nothing to score yet (no items, or an item without PCL
        scores) is paired with ``None``.
        """
        team = self.load_team(team_id)
        sprints = sorted((self.load_sprint(sid) for sid in team.sprint_ids), key=lambda s: (s.start_date, s.id))
        out = []
        for sprint in sprints:
            try:
                metrics = compute_pbr(sprint, strict=strict)
            except MetricError:
                if strict:
                    raise
                metrics = None
            out.append((sprint, metrics))
        return out
