"""Synthetic multi-sprint history for a few teams: trend SVGs, a burndown and a comparison table.

    python3 scripts/trend_demo.py --out /tmp/pbr-demo
"""

import argparse
import random
from datetime import date, timedelta
from pathlib import Path

from pbr.metrics import compare_teams, trend
from pbr.model import PblItem, Sprint, Task, TaskEvent, TaskStatus, Team, default_catalog
from pbr.reporting import render_burndown_plot, render_team_comparison, render_trend_plot
from pbr.store import Repository
from pbr.workflow import apply_event, burndown, next_statuses

CATALOG = default_catalog()
PCL = [f.id for f in CATALOG.pcl_factors]
TAR = [f.id for f in CATALOG.tar_factors]


def _rating(rng: random.Random, centre: float) -> str:
    return f"{min(5.0, max(1.0, rng.gauss(centre, 0.6))):.2f}"


def synthetic_sprint(rng: random.Random, team: str, n: int, start: date, skill: float) -> Sprint:
    items = []
    for k in range(rng.randint(3, 7)):
        item = PblItem(f"PBL{k + 1}", title=f"story {k + 1}")
        for f in rng.sample(PCL, rng.randint(3, len(PCL))):
            item = item.rate_pcl(f, _rating(rng, 3.2), f"{rng.randint(1, 10) / 10:.1f}")
        for f in rng.sample(TAR, rng.randint(2, len(TAR))):
            item = item.rate_tar(f, _rating(rng, skill))
        items.append(item)
    length = 10
    tasks = []
    for k in range(rng.randint(4, 9)):
        task = Task(f"T{k + 1}", rng.choice(items).id, estimate_hours=rng.choice([3, 6]),
                    testable=rng.random() < 0.6)
        day = 0
        while task.status is not TaskStatus.DONE and day < length:
            day += rng.randint(0, 3)
            options = next_statuses(task, allow_reopen=False)
            if day >= length or not options:
                break
            task = apply_event(task, TaskEvent(task.id, day, task.status, options[0], "dev"))
        tasks.append(task)
    return Sprint(f"{team}-{n:02d}", team, start, length, tuple(items), tuple(tasks))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="pbr-demo", help="output directory (repository goes in out/repo)")
    ap.add_argument("--sprints", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    repo = Repository.init(out / "repo")
    teams = {"alpha": 3.0, "beta": 3.6, "gamma": 2.6}
    for team, skill in teams.items():
        repo.save_team(Team(team))
        for n in range(args.sprints):
            start = date(2024, 1, 8) + timedelta(days=14 * n)
            repo.save_sprint(synthetic_sprint(rng, team, n + 1, start, skill + 0.2 * n))

    per_team = {}
    for team in teams:
        history = [m for _, m in repo.load_history(team) if m is not None]
        per_team[team] = history
        (out / f"trend-{team}.svg").write_text(render_trend_plot(trend(history), f"PBR by sprint, team {team}"))
    last = repo.load_sprint(f"alpha-{args.sprints:02d}")
    (out / "burndown-alpha.svg").write_text(render_burndown_plot(burndown(last), last))
    print(render_team_comparison(compare_teams(per_team)), end="")
    print(f"wrote {len(teams)} trend plots and a burndown to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
