"""Compare every weighting scheme on the bundled contests (or a directory of files).

Writes one records report plus per-category aggregates per scheme. With the
published election files on disk, point --contest-dir at them to reproduce
the full comparison protocol; without them the bundled synthetic fixtures
stand in.

Usage:
    python3 scripts/run_scheme_comparison.py [--reps 500] [--seed 0] [--threads 1]
        [--contest-dir DIR] [--out-dir results/]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from irvaudit.ballots import parse_profile
from irvaudit.fixtures import fixture_contest
from irvaudit.sim import SimPlan, aggregate, default_report_name, emit_report, run_plan
from irvaudit.weights import parse_scheme

ALL_SCHEMES = (
    "linear",
    "quadratic",
    "largest",
    "linear-plus",
    "quadratic-plus",
    "largest-count:5",
    "largest-mean:5",
    "linear-count:7",
    "linear-mean:7",
    "ons:4",
)


def load_contests(contest_dir):
    if contest_dir is None:
        return tuple(fixture_contest(c) for c in ("Small", "Medium", "Large", "Huge"))
    contests = []
    for path in sorted(Path(contest_dir).iterdir()):
        if path.is_file():
            contests.append(parse_profile(path.read_bytes(), contest_id=path.stem))
    if not contests:
        raise SystemExit(f"no contest files in {contest_dir}")
    return tuple(contests)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--risk", type=float, default=0.05)
    ap.add_argument("--contest-dir")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # the previous default tuning, per the original comparison protocol
    plan = SimPlan(
        contests=load_contests(args.contest_dir),
        schemes=tuple(parse_scheme(s) for s in ALL_SCHEMES),
        eta0_grid=(0.52,),
        d_grid=(50.0,),
        replications=args.reps,
        risk_limit=args.risk,
        master_seed=args.seed,
    )
    records = run_plan(plan, threads=args.threads)
    records_path = out_dir / default_report_name(plan, kind="scheme_compare")
    emit_report(records, records_path)
    print(f"wrote {records_path} ({len(records)} rows)")

    for scheme in ALL_SCHEMES:
        rows = [r for r in records if r.scheme == scheme]
        aggs = aggregate(rows, group_by="category")
        agg_path = out_dir / f"scheme_{scheme.replace(':', '_')}_by_category.csv"
        emit_report(aggs, agg_path)
        summary = ", ".join(f"{a.group}={a.mean_fraction:.1%}+-{2 * a.se_fraction:.1%}" for a in aggs)
        print(f"{scheme:16s} {summary}")


if __name__ == "__main__":
    main()
