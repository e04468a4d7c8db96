"""Measure old-vs-new default separation on candidate Small-margin fixtures.

Used when (re)tuning the bundled Small fixture: the protocol comparison
expects the (eta0=0.51, d=100) default to beat (0.52, 50) on small margins,
and this prints the engine-level mean sample sizes, the reduction, and the
two-standard-error bar at a given replication count.

Usage:
    python3 scripts/calibrate_small_fixture.py [--reps 200] [--seed 0]
        [--margins 0.014,0.0148]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import irvaudit as iv
from irvaudit.sim import derive_seed, simulate_audit


def arm(contest, eta0, d, reps, master):
    cfg = iv.AuditConfig(
        k=contest.profile.k,
        reported_winner=contest.reported_winner,
        N=contest.profile.N,
        scheme=iv.parse_scheme("largest"),
        alpha=iv.AlphaParams(eta0=eta0, d=d),
    )
    return np.array(
        [
            simulate_audit(contest, cfg, derive_seed(master, contest.id, "largest", eta0, d, rep))[1]
            for rep in range(reps)
        ],
        dtype=float,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--margins", default="0.014,0.0148")
    ap.add_argument("--N", type=int, default=20_000)
    args = ap.parse_args()

    for margin in (float(m) for m in args.margins.split(",")):
        contest = iv.two_finalist_contest(6, args.N, margin)
        t0 = time.time()
        old = arm(contest, 0.52, 50.0, args.reps, args.seed)
        new = arm(contest, 0.51, 100.0, args.reps, args.seed)
        delta = old.mean() - new.mean()
        se = float(np.hypot(old.std(ddof=1), new.std(ddof=1)) / np.sqrt(args.reps))
        print(
            f"margin={margin:g} reps={args.reps}: "
            f"old={old.mean():.0f} sd={old.std():.0f} (full {(old == args.N).mean():.0%})  "
            f"new={new.mean():.0f} sd={new.std():.0f} (full {(new == args.N).mean():.0%})  "
            f"reduction={delta:.0f}+-{se:.0f}  2combSE={2 * se:.0f}  [{time.time() - t0:.0f}s]",
            flush=True,
        )


if __name__ == "__main__":
    main()
