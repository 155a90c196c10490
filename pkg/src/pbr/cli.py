"""``pbr`` command line.

Exit codes: 0 success, 1 validation or domain error, 2 usage error, 3 I/O error.
The repository root comes from ``--repo`` or, failing that, ``$PBR_REPO``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

from pbr.metrics import MetricError, SprintMetrics, compare_teams, compute_pbr, trend, truncate2
from pbr.model import (
    OPTIONAL_FACTORS,
    FactorDefinition,
    FactorKind,
    PblItem,
    Sprint,
    Task,
    TaskEvent,
    TaskStatus,
    Team,
    validate_sprint,
)
from pbr.reporting import render_burndown_plot, render_sprint_report, render_team_comparison, render_trend_plot
from pbr.store import IoFailure, Repository, StoreError, ValidationFailed
from pbr.workflow import WorkflowError, burndown

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


def _out(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _warn(text: str) -> None:
    sys.stderr.write(f"warning: {text}\n")


def _repo_root(args: argparse.Namespace) -> Path:
    root = getattr(args, "repo", None) or os.environ.get("PBR_REPO")
    if not root:
        raise UsageError("no repository given: pass --repo or set PBR_REPO")
    return Path(root)


def _open(args: argparse.Namespace) -> Repository:
    return Repository.open(_repo_root(args))


def _load_item(sprint: Sprint, item_id: str) -> PblItem:
    item = sprint.item(item_id)
    if item is None:
        raise DomainError(f"item {item_id} not found in sprint {sprint.id}")
    return item


def _require_factor(repo: Repository, factor_id: str, kind: FactorKind) -> None:
    factor = repo.load_catalog().get(factor_id)
    if factor is None:
        raise DomainError(f"unknown factor {factor_id!r}")
    if factor.kind is not kind:
        raise DomainError(f"factor {factor_id} is a {factor.kind.value} factor, not {kind.value}")


def _metrics_json(m: SprintMetrics) -> dict:
    return {
        "sprint_id": m.sprint_id,
        "team_id": m.team_id,
        "pbr": str(m.pbr_display),
        "pbr_exact": str(m.pbr),
        "band": m.band.label,
        "items": [
            {"item_id": i.item_id, "pcl": str(i.pcl_display), "tar": str(i.tar_display),
             "pcl_exact": str(i.pcl), "tar_exact": str(i.tar)}
            for i in m.items
        ],
        "excluded": list(m.excluded),
        "warnings": list(m.warnings),
    }


# -- commands ---------------------------------------------------------------

def cmd_init(args):
    root = Path(args.root) if args.root else _repo_root(args)
    Repository.init(root)
    _out(f"initialized repository at {root}")


def cmd_team_add(args):
    repo = _open(args)
    if args.id in repo.team_ids():
        raise DomainError(f"team {args.id} already exists")
    repo.save_team(Team(args.id, args.name or args.id))
    _out(args.id)


def cmd_sprint_new(args):
    repo = _open(args)
    if args.id in repo.sprint_ids():
        raise DomainError(f"sprint {args.id} already exists")
    try:
        start = date.fromisoformat(args.start)
    except ValueError:
        raise UsageError(f"--start must be YYYY-MM-DD, got {args.start!r}") from None
    repo.save_sprint(Sprint(args.id, args.team, start, args.length))
    _out(args.id)


def cmd_item_add(args):
    repo = _open(args)
    sprint = repo.load_sprint(args.sprint)
    if sprint.item(args.id) is not None:
        raise DomainError(f"item {args.id} already exists in sprint {sprint.id}")
    repo.save_sprint(sprint.with_item(PblItem(args.id, args.title or "", args.story or "")))
    _out(args.id)


def _read_table(path: str) -> tuple[list[str], list[tuple[str, str, list[str]]]]:
    """Parse a row-shaped factor table.

    The header holds two label columns, then factor ids, optionally closed by
    a PCL or TAR summary column. Each row is (item, row label, cells); an empty
    item cell repeats the item above.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DomainError(f"{path} is empty")
    factors = []
    for cell in rows[0][2:]:
        cell = cell.strip()
        if not cell or cell.upper() in ("PCL", "TAR"):
            break
        factors.append(cell)
    out = []
    current = ""
    for n, row in enumerate(rows[1:], 2):
        row = row + [""] * (2 + len(factors) - len(row))
        current = row[0].strip() or current
        if not current:
            raise DomainError(f"{path}:{n}: row has no item id")
        out.append((current, row[1].strip().lower(), [c.strip() for c in row[2:2 + len(factors)]]))
    return factors, out


def _bulk_rate(repo: Repository, sprint: Sprint, path: str, kind: FactorKind) -> int:
    factors, rows = _read_table(path)
    for f in factors:
        _require_factor(repo, f, kind)
    values: dict[str, list[str]] = {}
    weights: dict[str, list[str]] = {}
    for item_id, label, cells in rows:
        if "weight" in label:
            weights[item_id] = cells
        elif kind is FactorKind.PCL and "rating" in label:
            continue  # value x weight; derived, not stored
        else:
            values[item_id] = cells
    count = 0
    for item_id, cells in values.items():
        item = sprint.item(item_id) or PblItem(item_id, item_id)
        for i, (factor, value) in enumerate(zip(factors, cells)):
            if not value:
                continue
            if kind is FactorKind.PCL:
                w = weights.get(item_id, [""] * len(factors))[i] or "1"
                item = item.rate_pcl(factor, value, w)
            else:
                item = item.rate_tar(factor, value)
            count += 1
        sprint = sprint.with_item(item)
    repo.save_sprint(sprint)
    return count


def cmd_rate(args, kind: FactorKind):
    repo = _open(args)
    sprint = repo.load_sprint(args.sprint)
    if args.from_csv:
        if args.item or args.factor or args.value:
            raise UsageError("--from-csv takes no item/factor/value arguments")
        n = _bulk_rate(repo, sprint, args.from_csv, kind)
        _out(f"stored {n} {kind.value} scores")
        return
    if not (args.item and args.factor and args.value):
        raise UsageError("need ITEM FACTOR VALUE (or --from-csv FILE)")
    _require_factor(repo, args.factor, kind)
    item = _load_item(sprint, args.item)
    try:
        if kind is FactorKind.PCL:
            item = item.rate_pcl(args.factor, args.value, args.weight)
        else:
            item = item.rate_tar(args.factor, args.value)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    repo.save_sprint(sprint.with_item(item))
    score = next(s for s in (item.pcl_scores if kind is FactorKind.PCL else item.tar_scores)
                 if s.factor_id == args.factor)
    shown = f"{score.value}" + (f" weight {score.weight}" if kind is FactorKind.PCL else "")
    _out(f"{sprint.id}/{item.id} {args.factor} = {shown}")


def cmd_task_add(args):
    repo = _open(args)
    sprint = repo.load_sprint(args.sprint)
    if sprint.task(args.id) is not None:
        raise DomainError(f"task {args.id} already exists in sprint {sprint.id}")
    task = Task(args.id, args.item, args.description or "", args.hours, not args.not_testable,
                added_day=args.day)
    repo.save_sprint(sprint.with_task(task))
    _out(args.id)


def cmd_task_move(args):
    repo = _open(args)
    sprint = repo.load_sprint(args.sprint)
    task = sprint.task(args.task)
    if task is None:
        raise DomainError(f"task {args.task} not found in sprint {sprint.id}")
    try:
        target = TaskStatus.parse(args.to_status)
        source = TaskStatus.parse(args.from_status) if args.from_status else task.status
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.day is None:
        day = task.history[-1].day_index if task.history else task.added_day
    else:
        day = args.day
    repo.append_event(sprint.id, TaskEvent(task.id, day, source, target, args.actor or ""),
                      allow_reopen=not args.no_reopen)
    _out(f"{task.id}: {source.label} -> {target.label} (day {day})")


def cmd_compute(args):
    repo = _open(args)
    m = compute_pbr(repo.load_sprint(args.sprint), strict=args.strict)
    for w in m.warnings:
        _warn(w)
    if args.json:
        _out(json.dumps(_metrics_json(m), indent=2, sort_keys=True))
    else:
        _out(f"PBR {m.pbr_display} ({m.band.label})")


def cmd_report(args):
    repo = _open(args)
    m = compute_pbr(repo.load_sprint(args.sprint), strict=args.strict)
    sys.stdout.write(render_sprint_report(m, args.format))


def _team_metrics(repo: Repository, team_id: str) -> list[SprintMetrics]:
    series = []
    for sprint, m in repo.load_history(team_id):
        if m is None:
            _warn(f"sprint {sprint.id} has nothing to score yet, skipped")
        else:
            series.append(m)
    return series


def cmd_trend(args):
    repo = _open(args)
    t = trend(_team_metrics(repo, args.team))
    if args.svg:
        _write(args.svg, render_trend_plot(t, f"PBR by sprint, team {args.team}"))
    if args.json:
        _out(json.dumps({
            "team_id": args.team,
            "points": [{"sprint_id": p.sprint_id, "pbr": str(truncate2(p.pbr)), "band": p.band.label}
                       for p in t.points],
            "min": str(truncate2(t.minimum)),
            "max": str(truncate2(t.maximum)),
            "mean": str(truncate2(t.mean)),
            "delta": str(truncate2(t.delta)),
        }, indent=2, sort_keys=True))
        return
    for p in t.points:
        _out(f"{p.sprint_id}  {truncate2(p.pbr)}  {p.band.label}")
    _out(f"min {truncate2(t.minimum)}  max {truncate2(t.maximum)}  "
         f"mean {truncate2(t.mean)}  delta {truncate2(t.delta):+}")


def cmd_compare(args):
    repo = _open(args)
    team_ids = args.teams or repo.team_ids()
    per_team = {}
    for team_id in team_ids:
        series = _team_metrics(repo, team_id)
        if series:
            per_team[team_id] = series
        elif args.teams:
            raise DomainError(f"team {team_id} has no scored sprints")
    sys.stdout.write(render_team_comparison(compare_teams(per_team), args.format))


def cmd_burndown(args):
    repo = _open(args)
    sprint = repo.load_sprint(args.sprint)
    series = burndown(sprint)
    if args.svg:
        _write(args.svg, render_burndown_plot(series, sprint))
    for day, hours in series.points:
        _out(f"{day}  {hours}")


def cmd_validate(args):
    repo = _open(args)
    result = validate_sprint(repo.load_sprint(args.sprint), repo.load_catalog())
    if result.ok:
        _out("ok")
        return
    raise ValidationFailed(f"sprint {args.sprint}", result.messages())


def cmd_catalog_list(args):
    catalog = _open(args).load_catalog()
    for f in catalog.pcl_factors + catalog.tar_factors:
        _out(f"{f.kind.value}  {f.id:<6} {f.name}")


def cmd_catalog_add(args):
    repo = _open(args)
    optional = {f.id: f for f in OPTIONAL_FACTORS}
    if args.kind is None and args.id in optional:
        factor = optional[args.id]
    else:
        if args.kind is None or not args.name:
            raise UsageError("--kind and --name are required for custom factors")
        factor = FactorDefinition(args.id, FactorKind(args.kind.upper()), args.name, args.description or "")
    try:
        repo.add_factor(factor)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    _out(factor.id)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# -- parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--repo", default=argparse.SUPPRESS, help="repository root (default: $PBR_REPO)")

    p = _Parser(prog="pbr", description="Sprint test-quality metrics (PCL, TAR, PBR).")
    p.add_argument("--repo", default=None, help="repository root (default: $PBR_REPO)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func)
        return sp

    sp = add("init", cmd_init, help="create an empty repository")
    sp.add_argument("root", nargs="?")

    team = sub.add_parser("team", help="team commands").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = team.add_parser("add", parents=[common])
    sp.add_argument("id")
    sp.add_argument("--name")
    sp.set_defaults(func=cmd_team_add)

    sprint = sub.add_parser("sprint", help="sprint commands").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = sprint.add_parser("new", parents=[common])
    sp.add_argument("id")
    sp.add_argument("--team", required=True)
    sp.add_argument("--start", required=True, help="YYYY-MM-DD")
    sp.add_argument("--length", type=int, required=True, help="sprint length in days (5-30)")
    sp.set_defaults(func=cmd_sprint_new)

    item = sub.add_parser("item", help="backlog item commands").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = item.add_parser("add", parents=[common])
    sp.add_argument("sprint")
    sp.add_argument("id")
    sp.add_argument("--title")
    sp.add_argument("--story")
    sp.set_defaults(func=cmd_item_add)

    for name, kind in (("rate-pcl", FactorKind.PCL), ("rate-tar", FactorKind.TAR)):
        sp = add(name, lambda a, k=kind: cmd_rate(a, k), help=f"set one {kind.value} score")
        sp.add_argument("sprint")
        sp.add_argument("item", nargs="?")
        sp.add_argument("factor", nargs="?")
        sp.add_argument("value", nargs="?")
        if kind is FactorKind.PCL:
            sp.add_argument("--weight", default="1")
        sp.add_argument("--from-csv", metavar="FILE", help="bulk load a table of scores")

    task = sub.add_parser("task", help="task commands").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = task.add_parser("add", parents=[common])
    sp.add_argument("sprint")
    sp.add_argument("id")
    sp.add_argument("--item", required=True)
    sp.add_argument("--hours", type=int, default=6, choices=(3, 6))
    sp.add_argument("--description")
    sp.add_argument("--not-testable", action="store_true")
    sp.add_argument("--day", type=int, default=0, help="sprint day the task was added")
    sp.set_defaults(func=cmd_task_add)
    sp = task.add_parser("move", parents=[common])
    sp.add_argument("sprint")
    sp.add_argument("task")
    sp.add_argument("to_status")
    sp.add_argument("--from", dest="from_status", help="expected current status")
    sp.add_argument("--day", type=int)
    sp.add_argument("--actor")
    sp.add_argument("--no-reopen", action="store_true", help="forbid quality assurance -> in progress")
    sp.set_defaults(func=cmd_task_move)

    sp = add("compute", cmd_compute, help="compute PBR for a sprint")
    sp.add_argument("sprint")
    sp.add_argument("--strict", action="store_true", help="fail on items without TAR scores")
    sp.add_argument("--json", action="store_true")

    sp = add("report", cmd_report, help="per-item report for a sprint")
    sp.add_argument("sprint")
    sp.add_argument("--format", choices=("text", "csv"), default="text")
    sp.add_argument("--strict", action="store_true")

    sp = add("trend", cmd_trend, help="PBR over a team's sprints")
    sp.add_argument("team")
    sp.add_argument("--svg", metavar="OUT")
    sp.add_argument("--json", action="store_true")

    sp = add("compare", cmd_compare, help="compare teams by mean PBR")
    sp.add_argument("--teams", nargs="+")
    sp.add_argument("--format", choices=("text", "csv"), default="text")

    sp = add("burndown", cmd_burndown, help="remaining hours per sprint day")
    sp.add_argument("sprint")
    sp.add_argument("--svg", metavar="OUT")

    sp = add("validate", cmd_validate, help="check a stored sprint")
    sp.add_argument("sprint")

    catalog = sub.add_parser("catalog", help="factor catalog").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    sp = catalog.add_parser("list", parents=[common])
    sp.set_defaults(func=cmd_catalog_list)
    sp = catalog.add_parser("add", parents=[common])
    sp.add_argument("id")
    sp.add_argument("--kind", choices=("pcl", "tar", "PCL", "TAR"))
    sp.add_argument("--name")
    sp.add_argument("--description")
    sp.set_defaults(func=cmd_catalog_add)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"pbr: usage error: {exc}\n")
        return EXIT_USAGE
    except IoFailure as exc:
        sys.stderr.write(f"pbr: I/O error: {exc}\n")
        return EXIT_IO
    except (StoreError, MetricError, WorkflowError, DomainError, ValueError) as exc:
        sys.stderr.write(f"pbr: {type(exc).__name__}: {exc}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        sys.stderr.write(f"pbr: I/O error: {exc}\n")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
