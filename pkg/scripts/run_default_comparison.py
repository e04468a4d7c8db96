"""Old default (eta0=0.52, d=50) vs new default (eta0=0.51, d=100), per contest.

Produces the per-contest reduction table (mean sample-size drop with a
combined standard error, keyed by contest margin) for the Largest scheme and
any others requested.

Usage:
    python3 scripts/run_default_comparison.py [--schemes largest,quadratic-plus]
        [--reps 500] [--seed 0] [--threads 1] [--contest-dir DIR] [--out-dir results/]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from irvaudit.sim import NEW_DEFAULT, PREVIOUS_DEFAULT, SimPlan, compare_reduction, emit_report, run_plan
from irvaudit.weights import parse_scheme
from run_scheme_comparison import load_contests


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--schemes", default="largest")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--risk", type=float, default=0.05)
    ap.add_argument("--contest-dir")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    contests = load_contests(args.contest_dir)

    for scheme_text in args.schemes.split(","):
        scheme = parse_scheme(scheme_text)
        records = []
        for eta0, d in (PREVIOUS_DEFAULT, NEW_DEFAULT):
            plan = SimPlan(
                contests=contests,
                schemes=(scheme,),
                eta0_grid=(eta0,),
                d_grid=(d,),
                replications=args.reps,
                risk_limit=args.risk,
                master_seed=args.seed,
            )
            records.extend(run_plan(plan, threads=args.threads))
        rows = compare_reduction(
            records,
            (str(scheme), *PREVIOUS_DEFAULT),
            (str(scheme), *NEW_DEFAULT),
        )
        path = out_dir / f"default_reduction_{scheme_text.replace(':', '_')}.csv"
        emit_report(rows, path)
        print(f"wrote {path}")
        for row in rows:
            print(
                f"  {row.contest_id:24s} margin={row.margin:.4f}  "
                f"reduction={row.reduction_n:8.1f} +- {2 * row.combined_se:.1f} ballots"
            )


if __name__ == "__main__":
    main()
