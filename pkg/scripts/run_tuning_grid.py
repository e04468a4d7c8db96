"""Sweep the shrink/truncate tuning grid (eta0 x d) for selected schemes.

Defaults to the published grid: eta0 in {0.505, 0.51, 0.52, 0.54} and
d in {10, 50, 100, 200, 500, 1000}, on the bundled fixtures or a directory
of contest files.

Usage:
    python3 scripts/run_tuning_grid.py [--schemes largest,quadratic-plus]
        [--reps 500] [--seed 0] [--threads 1] [--contest-dir DIR] [--out-dir results/]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from irvaudit.sim import PAPER_D_GRID, PAPER_ETA0_GRID, SimPlan, aggregate, default_report_name, emit_report, run_plan
from irvaudit.weights import parse_scheme
from run_scheme_comparison import load_contests


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--schemes", default="largest,quadratic-plus,largest-count:5,linear-count:7")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--risk", type=float, default=0.05)
    ap.add_argument("--contest-dir")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    plan = SimPlan(
        contests=load_contests(args.contest_dir),
        schemes=tuple(parse_scheme(s) for s in args.schemes.split(",")),
        eta0_grid=PAPER_ETA0_GRID,
        d_grid=PAPER_D_GRID,
        replications=args.reps,
        risk_limit=args.risk,
        master_seed=args.seed,
    )
    records = run_plan(plan, threads=args.threads)
    records_path = out_dir / default_report_name(plan, kind="tuning_grid")
    emit_report(records, records_path)
    print(f"wrote {records_path} ({len(records)} rows)")

    aggs = aggregate(records, group_by="cell")
    emit_report(aggs, out_dir / "tuning_grid_by_cell.csv")
    best = min(aggs, key=lambda a: a.mean_fraction)
    print(f"best cell by mean fraction: {best.group} at {best.mean_fraction:.1%}")


if __name__ == "__main__":
    main()
