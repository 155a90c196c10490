"""Rebuild the five-item case-study sprint and print its report.

    python3 scripts/case_study.py              # in memory, text report
    python3 scripts/case_study.py --csv
    python3 scripts/case_study.py --repo /tmp/cs   # also persist it
"""

import argparse
import sys

from pbr.casestudy import PRINTED_PCL, PRINTED_TAR, case_study_sprint, case_study_team
from pbr.metrics import compute_pbr
from pbr.reporting import render_sprint_report
from pbr.store import Repository


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", action="store_true", help="print the CSV report instead of text")
    ap.add_argument("--repo", help="initialise a repository here and save the sprint into it")
    ap.add_argument("--compare", action="store_true", help="show computed vs tabulated values")
    args = ap.parse_args()

    sprint = case_study_sprint()
    if args.repo:
        repo = Repository.init(args.repo)
        repo.save_team(case_study_team())
        repo.save_sprint(sprint)
        sprint = repo.load_sprint(sprint.id)
        print(f"saved {sprint.id} to {args.repo}", file=sys.stderr)

    metrics = compute_pbr(sprint)
    sys.stdout.write(render_sprint_report(metrics, "csv" if args.csv else "text"))

    if args.compare:
        print()
        print(f"{'item':<6} {'PCL':<4}  {'table':<5}  {'TAR':<4}  table")
        for row in metrics.items:
            print(f"{row.item_id:<6} {row.pcl_display}  {PRINTED_PCL[row.item_id]:<5}  "
                  f"{row.tar_display}  {PRINTED_TAR[row.item_id]}")
        print(f"exact PBR {metrics.pbr} = {float(metrics.pbr):.8f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
