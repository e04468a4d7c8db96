"""Replicated simulated audits: plans, seeding, aggregation, and reports.

A plan is a full cross product of contests x schemes x (eta0, d) cells x
replications.  Every replication's RNG seed is a stable 64-bit hash of
(master seed, contest id, scheme string, eta0, d, replication index), so a
plan's output is identical no matter how its work is ordered or spread
across workers.  Reports are written with fixed column order, LF line
endings, and 6-significant-digit floats so equal results mean equal bytes.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .alpha import AlphaParams
from .ballots import MARGIN_CATEGORIES, Contest, irv_tabulate, margin_category
from .engine import AuditConfig, AuditState
from .weights import SchemeSpec

__all__ = [
    "SimPlan",
    "SimRecord",
    "Aggregate",
    "ReductionRow",
    "derive_seed",
    "simulate_audit",
    "run_plan",
    "aggregate",
    "compare_reduction",
    "emit_report",
    "plan_hash",
    "default_report_name",
    "PAPER_ETA0_GRID",
    "PAPER_D_GRID",
]

# the published tuning grid
PAPER_ETA0_GRID = (0.505, 0.51, 0.52, 0.54)
PAPER_D_GRID = (10.0, 50.0, 100.0, 200.0, 500.0, 1000.0)

PREVIOUS_DEFAULT = (0.52, 50.0)
NEW_DEFAULT = (0.51, 100.0)


@dataclass(frozen=True)
class SimPlan:
    contests: tuple[Contest, ...]
    schemes: tuple[SchemeSpec, ...]
    eta0_grid: tuple[float, ...] = (NEW_DEFAULT[0],)
    d_grid: tuple[float, ...] = (NEW_DEFAULT[1],)
    replications: int = 500
    risk_limit: float = 0.05
    master_seed: int = 0
    wrong_winner: bool = False
    c: Optional[float] = None
    eps: float = 1e-6

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if not self.contests or not self.schemes or not self.eta0_grid or not self.d_grid:
            raise ValueError("plan axes must be nonempty")


@dataclass(frozen=True)
class SimRecord:
    contest_id: str
    category: str
    margin: float
    scheme: str
    eta0: float
    d: float
    replication: int
    outcome: str          # "certified" | "full_count" | "error"
    n: int
    N: int
    fraction: float
    error: Optional[str] = None


@dataclass(frozen=True)
class Aggregate:
    group: str
    count: int
    mean_fraction: float
    se_fraction: float
    lo: float             # mean - 2 SE
    hi: float             # mean + 2 SE
    mean_n: float
    se_n: float
    degenerate: bool


@dataclass(frozen=True)
class ReductionRow:
    contest_id: str
    category: str
    margin: float
    baseline_mean_n: float
    candidate_mean_n: float
    reduction_n: float
    combined_se: float


def derive_seed(master_seed: int, contest_id: str, scheme: str, eta0: float, d: float, replication: int) -> int:
    """Stable 64-bit replication seed; documented so others can reproduce tables."""
    key = f"{master_seed}|{contest_id}|{scheme}|{eta0:.17g}|{d:.17g}|{replication}"
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "big")


def _contest_meta(contest: Contest, wrong_winner: bool):
    record = irv_tabulate(contest.profile)
    margin = record.last_round_margin
    if wrong_winner:
        reported = record.order[-2]
    elif contest.reported_winner is not None:
        reported = contest.reported_winner
    else:
        reported = record.winner
    return reported, margin, margin_category(margin)


def _audit_config(contest: Contest, reported: int, scheme: SchemeSpec, eta0: float, d: float, plan_like) -> AuditConfig:
    params = AlphaParams(eta0=eta0, d=d, c=plan_like.c, eps=plan_like.eps)
    return AuditConfig(
        k=contest.profile.k,
        reported_winner=reported,
        N=contest.profile.N,
        scheme=scheme,
        alpha=params,
        risk_limit=plan_like.risk_limit,
    )


def _assort_matrix(contest: Contest, registry) -> np.ndarray:
    return np.stack([registry.assort_vector(ranking) for ranking, _ in contest.profile.lines])


def _line_indices(contest: Contest) -> np.ndarray:
    counts = [count for _, count in contest.profile.lines]
    return np.repeat(np.arange(len(counts)), counts)


def simulate_audit(contest: Contest, config: AuditConfig, seed: int) -> tuple[str, int]:
    """One replication: shuffle the expanded profile, audit it, report (outcome, n)."""
    state = AuditState(config)
    matrix = _assort_matrix(contest, state.registry)
    rows = _line_indices(contest)
    perm = np.random.default_rng(seed).permutation(contest.profile.N)
    outcome = state.run_assort_rows(matrix, rows[perm])
    return outcome.status, outcome.draws_seen


@dataclass(frozen=True)
class _Cell:
    contest: Contest
    scheme: SchemeSpec
    eta0: float
    d: float
    plan: SimPlan


def _run_cell(cell: _Cell) -> list[SimRecord]:
    plan = cell.plan
    contest = cell.contest
    reported, margin, category = _contest_meta(contest, plan.wrong_winner)
    config = _audit_config(contest, reported, cell.scheme, cell.eta0, cell.d, plan)
    scheme_str = str(cell.scheme)

    base = AuditState(config)
    matrix = _assort_matrix(contest, base.registry)
    rows = _line_indices(contest)
    N = contest.profile.N

    records = []
    for rep in range(plan.replications):
        seed = derive_seed(plan.master_seed, contest.id, scheme_str, cell.eta0, cell.d, rep)
        try:
            state = AuditState(config)
            perm = np.random.default_rng(seed).permutation(N)
            outcome = state.run_assort_rows(matrix, rows[perm])
            records.append(
                SimRecord(
                    contest_id=contest.id,
                    category=category,
                    margin=margin,
                    scheme=scheme_str,
                    eta0=cell.eta0,
                    d=cell.d,
                    replication=rep,
                    outcome=outcome.status,
                    n=outcome.draws_seen,
                    N=N,
                    fraction=outcome.draws_seen / N,
                )
            )
        except Exception as exc:  # record the failure, keep the plan running
            records.append(
                SimRecord(
                    contest_id=contest.id,
                    category=category,
                    margin=margin,
                    scheme=scheme_str,
                    eta0=cell.eta0,
                    d=cell.d,
                    replication=rep,
                    outcome="error",
                    n=0,
                    N=N,
                    fraction=0.0,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    return records


def run_plan(plan: SimPlan, threads: int = 1) -> list[SimRecord]:
    """Execute the full plan; output is sorted and independent of scheduling."""
    cells = [
        _Cell(contest, scheme, eta0, d, plan)
        for contest in plan.contests
        for scheme in plan.schemes
        for eta0 in plan.eta0_grid
        for d in plan.d_grid
    ]
    if threads <= 1 or len(cells) == 1:
        results = [_run_cell(cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell, cells))
    records = [rec for cell_records in results for rec in cell_records]
    records.sort(key=lambda r: (r.contest_id, r.scheme, r.eta0, r.d, r.replication))
    return records


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    return mean, se


def aggregate(records: Sequence[SimRecord], group_by: str = "category") -> list[Aggregate]:
    """Mean and standard error of sample sizes per group (error rows excluded)."""
    keyers = {
        "category": lambda r: r.category,
        "contest": lambda r: r.contest_id,
        "cell": lambda r: f"{r.contest_id}|{r.scheme}|eta0={r.eta0:g}|d={r.d:g}",
    }
    if group_by not in keyers:
        raise ValueError(f"group_by must be one of {sorted(keyers)}")
    keyer = keyers[group_by]
    groups: dict[str, list[SimRecord]] = {}
    for rec in records:
        if rec.outcome == "error":
            warnings.warn(f"skipping error row for {rec.contest_id} rep {rec.replication}")
            continue
        groups.setdefault(keyer(rec), []).append(rec)
    if not groups:
        raise ValueError("nothing to aggregate")

    if group_by == "category":
        order = [c for c in MARGIN_CATEGORIES if c in groups]
    else:
        order = sorted(groups)

    out = []
    for key in order:
        fractions = np.array([r.fraction for r in groups[key]])
        ns = np.array([r.n for r in groups[key]], dtype=float)
        mean_f, se_f = _mean_se(fractions)
        mean_n, se_n = _mean_se(ns)
        out.append(
            Aggregate(
                group=key,
                count=len(fractions),
                mean_fraction=mean_f,
                se_fraction=se_f,
                lo=mean_f - 2 * se_f,
                hi=mean_f + 2 * se_f,
                mean_n=mean_n,
                se_n=se_n,
                degenerate=len(fractions) == 1,
            )
        )
    return out


def compare_reduction(
    records: Sequence[SimRecord],
    baseline: tuple[str, float, float],
    candidate: tuple[str, float, float],
) -> list[ReductionRow]:
    """Per-contest drop in mean sample size moving from baseline to candidate cell."""

    def cell_records(which):
        scheme, eta0, d = which
        return {
            cid: [r for r in records
                  if r.contest_id == cid and r.scheme == scheme and r.eta0 == eta0
                  and r.d == d and r.outcome != "error"]
            for cid in {r.contest_id for r in records}
        }

    base_cells = cell_records(baseline)
    cand_cells = cell_records(candidate)
    out = []
    for cid in sorted(base_cells):
        b, c = base_cells[cid], cand_cells.get(cid, [])
        if not b or not c:
            raise ValueError(f"missing cell for contest {cid}")
        b_n = np.array([r.n for r in b], dtype=float)
        c_n = np.array([r.n for r in c], dtype=float)
        mean_b, se_b = _mean_se(b_n)
        mean_c, se_c = _mean_se(c_n)
        out.append(
            ReductionRow(
                contest_id=cid,
                category=b[0].category,
                margin=b[0].margin,
                baseline_mean_n=mean_b,
                candidate_mean_n=mean_c,
                reduction_n=mean_b - mean_c,
                combined_se=float(np.hypot(se_b, se_c)),
            )
        )
    out.sort(key=lambda row: (row.margin, row.contest_id))
    return out


# ---------------------------------------------------------------------------
# Reports


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    if value is None:
        return ""
    return str(value)


def emit_report(rows: Sequence, path, format: str = "delimited-table") -> None:
    """Write rows of one dataclass type with a stable column order."""
    rows = list(rows)
    if rows:
        names = [f.name for f in fields(rows[0])]
    else:
        warnings.warn("emitting a header-only report: no rows")
        names = [f.name for f in fields(SimRecord)]
    if format == "delimited-table":
        lines = [",".join(names)]
        for row in rows:
            lines.append(",".join(_fmt(getattr(row, name)) for name in names))
        text = "\n".join(lines) + "\n"
    elif format == "structured":
        payload = [{name: getattr(row, name) for name in names} for row in rows]
        text = json.dumps(payload, indent=None, separators=(",", ":")) + "\n"
    else:
        raise ValueError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_records(path) -> list[SimRecord]:
    """Load a delimited-table records report back into SimRecord rows."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines:
        return []
    names = lines[0].split(",")
    expected = [f.name for f in fields(SimRecord)]
    if names != expected:
        raise ValueError(f"not a records report: header {names}")
    out = []
    for line in lines[1:]:
        vals = line.split(",")
        row = dict(zip(names, vals))
        out.append(
            SimRecord(
                contest_id=row["contest_id"],
                category=row["category"],
                margin=float(row["margin"]),
                scheme=row["scheme"],
                eta0=float(row["eta0"]),
                d=float(row["d"]),
                replication=int(row["replication"]),
                outcome=row["outcome"],
                n=int(row["n"]),
                N=int(row["N"]),
                fraction=float(row["fraction"]),
                error=row["error"] or None,
            )
        )
    return out


def plan_hash(plan: SimPlan) -> str:
    parts = [
        ",".join(c.id for c in plan.contests),
        ",".join(str(s) for s in plan.schemes),
        ",".join(f"{e:.17g}" for e in plan.eta0_grid),
        ",".join(f"{d:.17g}" for d in plan.d_grid),
        str(plan.replications),
        f"{plan.risk_limit:.17g}",
        str(plan.master_seed),
        str(plan.wrong_winner),
        "" if plan.c is None else f"{plan.c:.17g}",
        f"{plan.eps:.17g}",
    ]
    return hashlib.blake2b("|".join(parts).encode(), digest_size=6).hexdigest()


def default_report_name(plan: SimPlan, kind: str = "records", ext: str = "csv") -> str:
    return f"{kind}_{plan_hash(plan)}.{ext}"
