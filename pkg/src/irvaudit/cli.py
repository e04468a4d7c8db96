"""Command-line front end: tabulate, audit, simulate, grid, report, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 the audit ran to a
full count (a distinct signal for scripts driving real audits).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .alpha import AlphaParams
from .ballots import Contest, ParseError, irv_tabulate, margin_category, parse_profile
from .engine import AuditConfig, AuditState, InvalidRankingError
from .fixtures import FIXTURE_MARGINS, fixture_contest
from .sim import (
    NEW_DEFAULT,
    PAPER_D_GRID,
    PAPER_ETA0_GRID,
    SimPlan,
    aggregate,
    compare_reduction,
    default_report_name,
    emit_report,
    read_records,
    run_plan,
)
from .weights import SCHEME_GRAMMAR, parse_scheme

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_FULL_COUNT = 3

_FORMAT_ALIASES = {
    "text": "canonical-text",
    "canonical-text": "canonical-text",
    "json": "canonical-structured",
    "canonical-structured": "canonical-structured",
    "margin-irv": "margin-irv-adapter",
    "margin-irv-adapter": "margin-irv-adapter",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; keep 2 for data errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_contest(args) -> Contest:
    if getattr(args, "fixture", None):
        return fixture_contest(args.fixture)
    if not args.infile:
        raise ParseError("no input contest: pass --in FILE or --fixture CATEGORY")
    path = Path(args.infile)
    text = path.read_bytes()
    fmt = _FORMAT_ALIASES[args.format] if args.format != "auto" else _sniff_format(text)
    return parse_profile(text, format=fmt, contest_id=path.stem)


def _sniff_format(text: bytes) -> str:
    stripped = text.lstrip()
    if stripped.startswith(b"{"):
        return "canonical-structured"
    if stripped.startswith(b"candidates:") or b"\ncandidates:" in text or b"ballots:" in text:
        return "canonical-text"
    return "margin-irv-adapter"


def _alpha_params(args) -> AlphaParams:
    return AlphaParams(eta0=args.eta0, d=args.d, c=args.c, eps=args.eps)


def _audit_config(contest: Contest, reported: int, args) -> AuditConfig:
    return AuditConfig(
        k=contest.profile.k,
        reported_winner=reported,
        N=contest.profile.N,
        scheme=parse_scheme(args.scheme),
        alpha=_alpha_params(args),
        risk_limit=args.risk,
    )


def _reported_winner(contest: Contest) -> int:
    if contest.reported_winner is not None:
        return contest.reported_winner
    return irv_tabulate(contest.profile).winner


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_tabulate(args) -> int:
    contest = _load_contest(args)
    record = irv_tabulate(contest.profile)
    names = contest.names
    print(f"contest: {contest.id}  (k={contest.profile.k}, N={contest.profile.N})")
    print("elimination order:", " -> ".join(names[c] for c in record.order))
    print("winner:", names[record.winner])
    for rnd, (tallies, exhausted) in enumerate(zip(record.round_tallies, record.exhausted), start=1):
        cells = ", ".join(f"{names[c]}={v}" for c, v in sorted(tallies.items()))
        print(f"round {rnd}: {cells}, exhausted={exhausted}")
    print(f"last-round margin: {record.last_round_margin:.6g} "
          f"({margin_category(record.last_round_margin)})")
    return EXIT_OK


def _print_status(state: AuditState, names) -> None:
    doc = state.status_snapshot(top_n=5)
    log10 = doc["min_max_martingale_log10"]
    hardest = ", ".join(
        ">".join(names[c] for c in h["order"]) + f"@{h['progress']:.0%}" for h in doc["hardest"]
    )
    print(
        f"[{doc['draws_seen']}/{doc['population']}] {doc['status']}  "
        f"p<={doc['p_proxy']:.4g}  rejected {doc['certified_fraction']:.1%}  "
        f"min max log10(M)={'inf' if log10 is None else format(log10, '.4g')}  hardest: {hardest}"
    )


def _cmd_audit(args) -> int:
    contest = _load_contest(args)
    names = contest.names
    reported = _reported_winner(contest)
    state = AuditState(_audit_config(contest, reported, args))
    print(f"auditing {contest.id}: reported winner {names[reported]}, "
          f"risk limit {args.risk:g}, scheme {state.config.scheme}")

    if args.stdin:
        return _interactive_audit(state, names)

    # file-driven: sample the contest's own ballots in seeded random order
    rng = np.random.default_rng(args.seed)
    expanded = [r for r, count in contest.profile.lines for _ in range(count)]
    order = rng.permutation(len(expanded))
    for i in order:
        state.process_ballot(expanded[i])
        if state.draws_seen % args.every == 0 or state.status != "running":
            _print_status(state, names)
        if state.status != "running":
            break
    return EXIT_OK if state.status == "certified" else EXIT_FULL_COUNT


def _interactive_audit(state: AuditState, names) -> int:
    """One ranking per line (comma-separated names); blank line prints status;
    'undo' reverts the last ballot; '-' is an empty (exhausted) ballot."""
    name_to_idx = {n: i for i, n in enumerate(names)}
    entered: list[tuple[int, ...]] = []
    for raw_line in sys.stdin:
        line = raw_line.strip()
        if not line:
            _print_status(state, names)
            continue
        if line == "undo":
            if not entered:
                print("nothing to undo", file=sys.stderr)
                continue
            entered.pop()
            state = AuditState.replay(state.config, entered)
            print(f"undone; {state.draws_seen} ballots stand")
            _print_status(state, names)
            continue
        if line == "-":
            ranking: tuple[int, ...] = ()
        else:
            try:
                ranking = tuple(name_to_idx[part.strip()] for part in line.split(","))
            except KeyError as exc:
                print(f"unknown candidate {exc.args[0]!r}", file=sys.stderr)
                continue
        try:
            state.process_ballot(ranking)
        except InvalidRankingError as exc:
            print(f"rejected ballot: {exc}", file=sys.stderr)
            continue
        entered.append(ranking)
        _print_status(state, names)
        if state.status != "running":
            break
    return EXIT_OK if state.status == "certified" else (
        EXIT_FULL_COUNT if state.status == "full_count" else EXIT_OK
    )


def _cmd_simulate(args) -> int:
    contest = _load_contest(args)
    plan = SimPlan(
        contests=(contest,),
        schemes=(parse_scheme(args.scheme),),
        eta0_grid=(args.eta0,),
        d_grid=(args.d,),
        replications=args.reps,
        risk_limit=args.risk,
        master_seed=args.seed,
        wrong_winner=args.wrong_winner,
        c=args.c,
        eps=args.eps,
    )
    records = run_plan(plan, threads=args.threads)
    out = args.out or default_report_name(plan)
    emit_report(records, out, format=args.report_format)
    certified = sum(1 for r in records if r.outcome == "certified")
    print(f"{len(records)} replications -> {out}  (certified {certified}, "
          f"full counts {sum(1 for r in records if r.outcome == 'full_count')})")
    return EXIT_OK


def _cmd_grid(args) -> int:
    contest = _load_contest(args)
    if args.preset != "paper-grid":
        raise ParseError(f"unknown preset {args.preset!r}")
    schemes = tuple(parse_scheme(s) for s in args.schemes.split(","))
    plan = SimPlan(
        contests=(contest,),
        schemes=schemes,
        eta0_grid=PAPER_ETA0_GRID,
        d_grid=PAPER_D_GRID,
        replications=args.reps,
        risk_limit=args.risk,
        master_seed=args.seed,
        wrong_winner=args.wrong_winner,
    )
    records = run_plan(plan, threads=args.threads)
    out = args.out or default_report_name(plan, kind="grid")
    emit_report(records, out, format=args.report_format)
    print(f"{len(records)} replications across {len(schemes) * len(PAPER_ETA0_GRID) * len(PAPER_D_GRID)} "
          f"cells -> {out}")
    return EXIT_OK


def _parse_cell(text: str):
    parts = text.split(":")
    if len(parts) < 3:
        raise ParseError("cell must be SCHEME:ETA0:D (scheme may itself contain ':arg')")
    scheme = ":".join(parts[:-2])
    return str(parse_scheme(scheme)), float(parts[-2]), float(parts[-1])


def _cmd_report(args) -> int:
    records = read_records(args.records)
    if args.baseline or args.candidate:
        if not (args.baseline and args.candidate):
            raise ParseError("need both --baseline and --candidate")
        rows = compare_reduction(records, _parse_cell(args.baseline), _parse_cell(args.candidate))
    else:
        rows = aggregate(records, group_by=args.group_by)
    emit_report(rows, args.out, format=args.report_format)
    print(f"{len(rows)} rows -> {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.serve_addr.rpartition(":")
    app = create_app(journal_dir=args.journal_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_contest_args(p, fixture_ok=True):
    p.add_argument("--in", dest="infile", metavar="PATH", help="contest file")
    p.add_argument("--format", choices=["auto"] + sorted(_FORMAT_ALIASES), default="auto",
                   help="contest file format (default: sniff)")
    if fixture_ok:
        p.add_argument("--fixture", choices=sorted(FIXTURE_MARGINS), metavar="CATEGORY",
                       help="use a bundled synthetic contest instead of --in")


def _add_alpha_args(p):
    p.add_argument("--eta0", type=float, default=NEW_DEFAULT[0], help="initial assorter-mean estimate")
    p.add_argument("--d", type=float, default=NEW_DEFAULT[1], help="shrinkage weight (draws)")
    p.add_argument("--c", type=float, default=None, help="exploration bandwidth (default (eta0-1/2)/2)")
    p.add_argument("--eps", type=float, default=1e-6, help="truncation gap below 1")
    p.add_argument("--risk", type=float, default=0.05, help="risk limit alpha")


def build_parser() -> argparse.ArgumentParser:
    epilog = f"scheme grammar: {SCHEME_GRAMMAR}"
    parser = _Parser(prog="irvaudit", description=__doc__, epilog=epilog,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tabulate", help="tabulate a contest and print the elimination record",
                       epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_contest_args(p)
    p.set_defaults(func=_cmd_tabulate)

    p = sub.add_parser("audit", help="run one audit (seeded sample of the file, or --stdin entry)",
                       epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_contest_args(p)
    p.add_argument("--scheme", default="largest", help="weighting scheme spec")
    _add_alpha_args(p)
    p.add_argument("--seed", type=int, default=0, help="sampling seed (file-driven mode)")
    p.add_argument("--stdin", action="store_true", help="read drawn ballots from stdin")
    p.add_argument("--every", type=int, default=100, help="status print cadence (file-driven mode)")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("simulate", help="replicated simulated audits of one contest",
                       epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_contest_args(p)
    p.add_argument("--scheme", default="largest", help="weighting scheme spec")
    _add_alpha_args(p)
    p.add_argument("--reps", type=int, default=500, help="replications")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--wrong-winner", action="store_true",
                   help="report the true runner-up as winner (risk validation)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="report path (default derived from the plan hash)")
    p.add_argument("--report-format", choices=["delimited-table", "structured"],
                   default="delimited-table")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("grid", help="tuning-parameter grid sweep",
                       epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_contest_args(p)
    p.add_argument("--preset", default="paper-grid",
                   help="grid preset (paper-grid: eta0 in {0.505,0.51,0.52,0.54}, "
                        "d in {10,50,100,200,500,1000})")
    p.add_argument("--schemes", default="largest", help="comma-separated scheme specs")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--risk", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wrong-winner", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="report path")
    p.add_argument("--report-format", choices=["delimited-table", "structured"],
                   default="delimited-table")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("report", help="aggregate or compare a records report",
                       epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--records", required=True, help="records CSV from simulate/grid")
    p.add_argument("--group-by", choices=["category", "contest", "cell"], default="category")
    p.add_argument("--baseline", help="cell SCHEME:ETA0:D for reduction comparison")
    p.add_argument("--candidate", help="cell SCHEME:ETA0:D for reduction comparison")
    p.add_argument("--out", required=True)
    p.add_argument("--report-format", choices=["delimited-table", "structured"],
                   default="delimited-table")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the live-audit session service",
                       epilog=epilog, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--serve-addr", default="127.0.0.1:8717", metavar="HOST:PORT")
    p.add_argument("--journal-dir", default="journals", help="session journal directory")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, InvalidRankingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
