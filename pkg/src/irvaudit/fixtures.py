"""Synthetic contests with controlled last-round margins.

The public election files these audits target are not bundled, so tests and
the protocol harness run on generated contests built by one recipe:

* Candidates A and B are the finalists; the remaining k-2 candidates are
  minors with strictly increasing first-round tallies, each splitting its
  transfers evenly between A and B (so eliminations never change the
  A-vs-B gap).
* A ballots rank [A, B], B ballots rank [B, A], minor ballots rank
  [minor, A] or [minor, B].
* The A-vs-B ballot split is chosen so the final two-candidate round has
  exactly the requested margin (rounded to a whole number of ballots with
  matching parity).

Every generated contest is tabulated and checked before being returned.
"""

from __future__ import annotations

from string import ascii_uppercase

from .ballots import BallotProfile, Candidate, Contest, irv_tabulate, margin_category

__all__ = ["two_finalist_contest", "fixture_contest", "FIXTURE_MARGINS"]

# margins per category, chosen to sit inside each bucket; Small is kept just
# under the 1.5% boundary so audits usually finish without a full count
FIXTURE_MARGINS = {"Small": 0.014, "Medium": 0.028, "Large": 0.07, "Huge": 0.20}

_DEFAULT_MINOR_FRACS = {
    3: (0.15,),
    4: (0.06, 0.09),
    5: (0.05, 0.07, 0.09),
    6: (0.04, 0.05, 0.06, 0.07),
}


def two_finalist_contest(
    k: int,
    N: int,
    margin: float,
    contest_id: str | None = None,
    minor_fracs: tuple[float, ...] | None = None,
) -> Contest:
    """Deterministic contest whose last-round margin is ``margin`` (of N)."""
    if not 2 <= k <= 26:
        raise ValueError("k out of range")
    if minor_fracs is None:
        minor_fracs = _DEFAULT_MINOR_FRACS.get(k)
        if minor_fracs is None and k > 2:
            raise ValueError(f"no default minor shares for k={k}")
        minor_fracs = minor_fracs or ()
    if len(minor_fracs) != k - 2:
        raise ValueError("need one minor share per non-finalist")

    # even totals keep every split exact
    minor_totals = [2 * round(frac * N / 2) for frac in minor_fracs]
    if sorted(set(minor_totals)) != sorted(minor_totals):
        raise ValueError("minor shares must produce distinct tallies")
    finalists = N - sum(minor_totals)
    gap = round(margin * N)
    if (finalists - gap) % 2 != 0:
        gap += 1
    a_total = (finalists + gap) // 2
    b_total = finalists - a_total
    if minor_totals and not b_total > max(minor_totals):
        raise ValueError("finalists would not survive the early rounds")
    if b_total <= 0:
        raise ValueError("margin too large for this population")

    names = tuple(ascii_uppercase[:k])
    lines = [((0, 1), a_total), ((1, 0), b_total)]
    for m, total in enumerate(minor_totals, start=2):
        lines.append(((m, 0), total // 2))
        lines.append(((m, 1), total - total // 2))
    profile = BallotProfile(k=k, lines=tuple(sorted(lines)))

    record = irv_tabulate(profile)
    expected_order = tuple(sorted(range(2, k), key=lambda c: minor_totals[c - 2])) + (1, 0)
    if record.order != expected_order:
        raise AssertionError(f"recipe produced order {record.order}, wanted {expected_order}")
    if round(record.last_round_margin * N) != gap:
        raise AssertionError("recipe produced an unexpected final margin")

    if contest_id is None:
        contest_id = f"fixture-k{k}-n{N}-m{gap}"
    roster = tuple(Candidate(i, n) for i, n in enumerate(names))
    return Contest(id=contest_id, profile=profile, candidates=roster, reported_winner=record.winner)


def fixture_contest(category: str, k: int = 6, N: int = 20_000) -> Contest:
    """Bundled contest for one margin category (see FIXTURE_MARGINS)."""
    margin = FIXTURE_MARGINS[category]
    contest = two_finalist_contest(k, N, margin, contest_id=f"{category.lower()}-k{k}")
    got = margin_category(irv_tabulate(contest.profile).last_round_margin)
    if got != category:
        raise AssertionError(f"fixture for {category} landed in {got}")
    return contest
