"""Ballot profiles, file ingestion, IRV tabulation, and margin categories.

A contest is a multiset of preference rankings over a small candidate
roster.  Tabulation repeatedly eliminates the candidate with the fewest
current first-choice votes; ballots whose listed candidates have all been
eliminated are exhausted and stop counting.  The margin observed in the
final two-candidate round (as a fraction of all ballots) is the proxy used
to bucket contests into difficulty categories.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

__all__ = [
    "Candidate",
    "BallotProfile",
    "Contest",
    "EliminationRecord",
    "ParseError",
    "DuplicateCandidateError",
    "UnknownCandidateError",
    "EmptyRosterError",
    "parse_profile",
    "irv_tabulate",
    "restricted_first_choice",
    "margin_category",
    "MARGIN_CATEGORIES",
]

# A ranking is an ordered tuple of distinct candidate indices; it may omit
# candidates, and the empty tuple is a ballot that never counts for anyone.
Ranking = tuple[int, ...]


class ParseError(ValueError):
    """Malformed profile input.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCandidateError(ParseError):
    pass


class UnknownCandidateError(ParseError):
    pass


class EmptyRosterError(ParseError):
    pass


@dataclass(frozen=True)
class Candidate:
    index: int
    name: str


@dataclass(frozen=True)
class BallotProfile:
    """Multiset of rankings: ``lines`` holds (ranking, multiplicity) pairs."""

    k: int
    lines: tuple[tuple[Ranking, int], ...]

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least two candidates")
        for ranking, count in self.lines:
            if count < 1:
                raise ValueError("multiplicities must be positive")
            if len(set(ranking)) != len(ranking):
                raise ValueError(f"duplicate candidate in ranking {ranking}")
            for c in ranking:
                if not 0 <= c < self.k:
                    raise ValueError(f"candidate index {c} out of range")

    @property
    def N(self) -> int:
        return sum(count for _, count in self.lines)


@dataclass(frozen=True)
class Contest:
    id: str
    profile: BallotProfile
    candidates: tuple[Candidate, ...]
    reported_winner: Optional[int] = None

    def __post_init__(self):
        if len(self.candidates) != self.profile.k:
            raise ValueError("roster size disagrees with profile")
        if self.reported_winner is not None and not 0 <= self.reported_winner < self.profile.k:
            raise ValueError("reported winner not in roster")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.candidates)

    def index_of(self, name: str) -> int:
        for c in self.candidates:
            if c.name == name:
                return c.index
        raise UnknownCandidateError(f"unknown candidate {name!r}")


@dataclass(frozen=True)
class EliminationRecord:
    """Outcome of one tabulation.

    ``order`` lists candidates first-eliminated to winner.  ``round_tallies``
    has one mapping per round (candidate index -> current votes), and
    ``exhausted`` the matching count of ballots with no standing candidate.
    """

    order: tuple[int, ...]
    round_tallies: tuple[dict[int, int], ...]
    exhausted: tuple[int, ...]
    last_round_margin: float

    @property
    def winner(self) -> int:
        return self.order[-1]


def restricted_first_choice(ranking: Sequence[int], standing: Iterable[int]) -> Optional[int]:
    """First listed candidate still standing, or None if the ballot is exhausted."""
    standing = standing if isinstance(standing, (set, frozenset)) else frozenset(standing)
    for c in ranking:
        if c in standing:
            return c
    return None


def irv_tabulate(
    profile: BallotProfile,
    tie_break: Callable[[Sequence[int]], int] = min,
) -> EliminationRecord:
    """Run instant-runoff tabulation and return the full elimination record.

    Each round, every ballot counts for its highest-ranked standing
    candidate; the candidate with the fewest votes is eliminated.
    ``tie_break`` picks the loser among tied minima; the default removes the
    tied candidate with the lowest index, which keeps results deterministic.

    The final round always has exactly two standing candidates, and
    ``last_round_margin`` is (winner - runner-up) / N there.
    """
    standing = set(range(profile.k))
    order: list[int] = []
    round_tallies: list[dict[int, int]] = []
    exhausted_per_round: list[int] = []
    N = profile.N
    last_round_margin = 0.0

    while len(standing) > 1:
        tallies = {c: 0 for c in sorted(standing)}
        exhausted = 0
        for ranking, count in profile.lines:
            f = restricted_first_choice(ranking, standing)
            if f is None:
                exhausted += count
            else:
                tallies[f] += count
        round_tallies.append(tallies)
        exhausted_per_round.append(exhausted)

        if len(standing) == 2:
            a, b = sorted(standing, key=lambda c: (tallies[c], c))
            # a loses this round (tie falls to the tie-break rule below)
            if tallies[a] == tallies[b]:
                a = tie_break(sorted(standing))
                b = (standing - {a}).pop()
            last_round_margin = (tallies[b] - tallies[a]) / N

        fewest = min(tallies.values())
        tied = [c for c in sorted(standing) if tallies[c] == fewest]
        loser = tied[0] if len(tied) == 1 else tie_break(tied)
        order.append(loser)
        standing.remove(loser)

    order.append(standing.pop())
    return EliminationRecord(
        order=tuple(order),
        round_tallies=tuple(round_tallies),
        exhausted=tuple(exhausted_per_round),
        last_round_margin=last_round_margin,
    )


MARGIN_CATEGORIES = ("Small", "Medium", "Large", "Huge")


def margin_category(last_round_margin: float) -> str:
    """Bucket a last-round margin (fraction of all ballots) by size.

    Intervals are closed at the lower bound: Huge >= 0.10, Large in
    [0.04, 0.10), Medium in [0.015, 0.04), Small below 0.015.
    """
    if not 0.0 <= last_round_margin <= 1.0:
        raise ValueError("margin must be a fraction in [0, 1]")
    if last_round_margin >= 0.10:
        return "Huge"
    if last_round_margin >= 0.04:
        return "Large"
    if last_round_margin >= 0.015:
        return "Medium"
    return "Small"


# ---------------------------------------------------------------------------
# Ingestion


def parse_profile(text: bytes | str, format: str = "canonical-text", contest_id: str = "contest") -> Contest:
    """Parse a contest from one of the supported on-disk formats.

    ``canonical-text`` is the native line format, ``canonical-structured``
    the equivalent JSON document, and ``margin-irv-adapter`` a best-effort
    reader for the published index-based ballot files.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if format == "canonical-text":
        return _parse_canonical_text(text, contest_id)
    if format == "canonical-structured":
        return _parse_canonical_structured(text, contest_id)
    if format == "margin-irv-adapter":
        return _parse_margin_irv(text, contest_id)
    raise ValueError(f"unknown profile format {format!r}")


def _split_names(blob: str, line_no: int) -> list[str]:
    names = [n.strip() for n in blob.split(",")]
    if any(not n for n in names):
        raise ParseError("empty candidate name", line_no)
    return names


def _build_contest(
    contest_id: str,
    names: Sequence[str],
    raw_lines: Iterable[tuple[Ranking, int]],
    reported_winner: Optional[int],
) -> Contest:
    if len(names) < 2:
        raise EmptyRosterError("roster must list at least two candidates")
    if len(set(names)) != len(names):
        raise DuplicateCandidateError("duplicate candidate name in roster")
    merged: dict[Ranking, int] = {}
    for ranking, count in raw_lines:
        merged[ranking] = merged.get(ranking, 0) + count
    profile = BallotProfile(k=len(names), lines=tuple(sorted(merged.items())))
    if profile.N == 0:
        raise ParseError("profile has no ballots")
    roster = tuple(Candidate(i, n) for i, n in enumerate(names))
    return Contest(id=contest_id, profile=profile, candidates=roster, reported_winner=reported_winner)


def _parse_canonical_text(text: str, contest_id: str) -> Contest:
    names: list[str] = []
    reported: Optional[str] = None
    raw: list[tuple[Ranking, int]] = []
    in_ballots = False
    saw_header = False

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if not in_ballots:
            if line.startswith("candidates:"):
                names = _split_names(line[len("candidates:"):], line_no)
                saw_header = True
            elif line.startswith("reported_winner:"):
                reported = line[len("reported_winner:"):].strip()
            elif line == "ballots:":
                in_ballots = True
            else:
                raise ParseError(f"unexpected header line {line!r}", line_no)
            continue
        if ":" not in line:
            raise ParseError("expected 'ranking : count'", line_no)
        ranking_part, _, count_part = line.rpartition(":")
        ranking_part = ranking_part.strip()
        try:
            count = int(count_part.strip())
        except ValueError:
            raise ParseError(f"bad count {count_part.strip()!r}", line_no) from None
        if count < 1:
            raise ParseError("count must be a positive integer", line_no)
        if ranking_part == "-":
            ranking: Ranking = ()
        else:
            idx = []
            for name in _split_names(ranking_part, line_no):
                if name not in names:
                    raise UnknownCandidateError(f"unknown candidate {name!r}", line_no)
                idx.append(names.index(name))
            if len(set(idx)) != len(idx):
                raise DuplicateCandidateError("candidate repeated within ranking", line_no)
            ranking = tuple(idx)
        raw.append((ranking, count))

    if not saw_header:
        raise EmptyRosterError("missing 'candidates:' header")
    reported_idx = None
    if reported is not None:
        if reported not in names:
            raise UnknownCandidateError(f"unknown reported winner {reported!r}")
        reported_idx = names.index(reported)
    return _build_contest(contest_id, names, raw, reported_idx)


def _parse_canonical_structured(text: str, contest_id: str) -> Contest:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    names = doc.get("candidates")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise EmptyRosterError("'candidates' must be an array of names")
    raw: list[tuple[Ranking, int]] = []
    for i, entry in enumerate(doc.get("ballots", [])):
        ranking_names = entry.get("ranking")
        count = entry.get("count")
        if not isinstance(ranking_names, list) or not isinstance(count, int) or count < 1:
            raise ParseError(f"ballot entry {i} malformed")
        idx = []
        for name in ranking_names:
            if name not in names:
                raise UnknownCandidateError(f"unknown candidate {name!r} in ballot entry {i}")
            idx.append(names.index(name))
        if len(set(idx)) != len(idx):
            raise DuplicateCandidateError(f"candidate repeated in ballot entry {i}")
        raw.append((tuple(idx), count))
    reported_idx = None
    if doc.get("reported_winner") is not None:
        reported = doc["reported_winner"]
        if reported not in names:
            raise UnknownCandidateError(f"unknown reported winner {reported!r}")
        reported_idx = names.index(reported)
    return _build_contest(str(doc.get("id", contest_id)), names, raw, reported_idx)


def _parse_margin_irv(text: str, contest_id: str) -> Contest:
    """Adapter for published index-based ballot files.

    Accepts an optional leading candidate count (candidates are then named
    by index), followed by lines like ``(0,2,1) : 31`` or ``0,2,1 : 31``.
    Best effort only; the canonical formats are normative.
    """
    k: Optional[int] = None
    raw: list[tuple[Ranking, int]] = []
    max_seen = -1
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if k is None and ":" not in line:
            try:
                k = int(line)
                continue
            except ValueError:
                raise ParseError("expected candidate count or ballot line", line_no) from None
        if ":" not in line:
            raise ParseError("expected 'prefs : count'", line_no)
        prefs_part, _, count_part = line.rpartition(":")
        prefs_part = prefs_part.strip().strip("()")
        try:
            count = int(count_part.strip())
        except ValueError:
            raise ParseError(f"bad count {count_part.strip()!r}", line_no) from None
        if count < 1:
            continue  # some published files carry zero-count lines
        if prefs_part:
            try:
                ranking = tuple(int(p.strip()) for p in prefs_part.split(","))
            except ValueError:
                raise ParseError("preferences must be candidate indices", line_no) from None
        else:
            ranking = ()
        if len(set(ranking)) != len(ranking):
            raise DuplicateCandidateError("candidate repeated within ranking", line_no)
        max_seen = max(max_seen, max(ranking, default=-1))
        raw.append((ranking, count))
    if k is None:
        k = max_seen + 1
    if k < 2:
        raise EmptyRosterError("could not determine a roster of at least two candidates")
    if max_seen >= k:
        raise UnknownCandidateError(f"candidate index {max_seen} outside roster of {k}")
    names = [str(i) for i in range(k)]
    return _build_contest(contest_id, names, raw, None)
