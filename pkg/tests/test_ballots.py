import pytest
from hypothesis import given
from hypothesis import strategies as st

from irvaudit.ballots import (
    BallotProfile,
    DuplicateCandidateError,
    EmptyRosterError,
    ParseError,
    UnknownCandidateError,
    irv_tabulate,
    margin_category,
    parse_profile,
    restricted_first_choice,
)
from oracles import brute_force_tabulate

CANONICAL = """\
# demo contest
candidates: A,B,C
ballots:
A,B : 3
C : 2
"""


class TestParsing:
    def test_canonical_text(self):
        contest = parse_profile(CANONICAL)
        assert contest.profile.k == 3
        assert contest.profile.N == 5
        assert contest.names == ("A", "B", "C")

    def test_merges_duplicate_lines(self):
        contest = parse_profile(CANONICAL + "A,B : 2\n")
        merged = dict(contest.profile.lines)
        assert merged[(0, 1)] == 5
        assert contest.profile.N == 7

    def test_duplicate_candidate_in_ranking(self):
        with pytest.raises(DuplicateCandidateError):
            parse_profile("candidates: A,B\nballots:\nA,A : 1\n")

    def test_unknown_candidate(self):
        with pytest.raises(UnknownCandidateError):
            parse_profile("candidates: A,B\nballots:\nA,Z : 1\n")

    def test_malformed_line_reports_number(self):
        with pytest.raises(ParseError) as excinfo:
            parse_profile("candidates: A,B\nballots:\nA : not-a-count\n")
        assert excinfo.value.line == 3

    def test_empty_roster(self):
        with pytest.raises(EmptyRosterError):
            parse_profile("ballots:\n")

    def test_reported_winner_and_empty_ranking(self):
        text = "candidates: A,B\nreported_winner: B\nballots:\nA : 2\n- : 3\n"
        contest = parse_profile(text)
        assert contest.reported_winner == 1
        assert dict(contest.profile.lines)[()] == 3

    def test_structured_roundtrip(self):
        doc = (
            '{"id": "x1", "candidates": ["A", "B"], "reported_winner": "A",'
            ' "ballots": [{"ranking": ["A"], "count": 2}, {"ranking": [], "count": 1}]}'
        )
        contest = parse_profile(doc, format="canonical-structured")
        assert contest.id == "x1"
        assert contest.profile.N == 3
        assert contest.reported_winner == 0

    def test_margin_irv_adapter(self):
        text = "3\n(0,1,2) : 4\n(2) : 1\n1 : 2\n"
        contest = parse_profile(text, format="margin-irv-adapter")
        assert contest.profile.k == 3
        assert contest.profile.N == 7
        assert dict(contest.profile.lines)[(0, 1, 2)] == 4


class TestTabulation:
    def test_transfer_example(self):
        # [A]x4, [B,A]x3, [C,B]x2: C out first, its votes flow to B
        profile = BallotProfile(k=3, lines=(((0,), 4), ((1, 0), 3), ((2, 1), 2)))
        record = irv_tabulate(profile)
        assert record.order == (2, 0, 1)
        assert record.round_tallies[1] == {0: 4, 1: 5}
        assert record.exhausted == (0, 0)

    def test_exhaustion_example(self):
        profile = BallotProfile(k=3, lines=(((0,), 4), ((1,), 3), ((2,), 2)))
        record = irv_tabulate(profile)
        assert record.order == (2, 1, 0)
        assert record.exhausted[1] == 2

    def test_two_candidate_margin(self):
        profile = BallotProfile(k=2, lines=(((0,), 6), ((1,), 4)))
        record = irv_tabulate(profile)
        assert record.order == (1, 0)
        assert record.last_round_margin == pytest.approx(0.2)

    def test_tie_break_lowest_index(self):
        profile = BallotProfile(k=2, lines=(((0,), 3), ((1,), 3)))
        assert irv_tabulate(profile).order == (0, 1)

    def test_tie_break_custom(self):
        profile = BallotProfile(k=2, lines=(((0,), 3), ((1,), 3)))
        assert irv_tabulate(profile, tie_break=max).order == (1, 0)


class TestMarginCategory:
    @pytest.mark.parametrize(
        "margin,category",
        [
            (0.12, "Huge"),
            (0.10, "Huge"),
            (0.07, "Large"),
            (0.04, "Large"),
            (0.03, "Medium"),
            (0.015, "Medium"),      # boundary owned by the upper class
            (0.0149, "Small"),
            (0.0, "Small"),
        ],
    )
    def test_boundaries(self, margin, category):
        assert margin_category(margin) == category

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            margin_category(1.5)


class TestRestrictedFirstChoice:
    def test_skips_eliminated(self):
        assert restricted_first_choice((2, 1, 0), {0, 1}) == 1

    def test_exhausted(self):
        assert restricted_first_choice((2,), {0, 1}) is None

    def test_empty(self):
        assert restricted_first_choice((), {0, 1}) is None


# ---------------------------------------------------------------------------
# Properties


@st.composite
def profiles(draw, max_k=4, max_lines=8, max_count=5):
    k = draw(st.integers(2, max_k))
    ranking = st.permutations(range(k)).map(tuple).flatmap(
        lambda p: st.integers(0, k).map(lambda n: p[:n])
    )
    lines = draw(
        st.dictionaries(ranking, st.integers(1, max_count), min_size=1, max_size=max_lines)
    )
    return BallotProfile(k=k, lines=tuple(sorted(lines.items())))


@given(profiles())
def test_round_conservation(profile):
    record = irv_tabulate(profile)
    for tallies, exhausted in zip(record.round_tallies, record.exhausted):
        assert sum(tallies.values()) + exhausted == profile.N


@given(profiles())
def test_matches_brute_force(profile):
    record = irv_tabulate(profile)
    order, tallies, exhausted = brute_force_tabulate(profile.k, list(profile.lines))
    assert record.order == tuple(order)
    assert list(record.round_tallies) == tallies
    assert list(record.exhausted) == exhausted


@given(profiles(), st.randoms())
def test_winner_invariant_under_line_shuffle_and_split(profile, rnd):
    base = irv_tabulate(profile)
    shuffled = list(profile.lines)
    rnd.shuffle(shuffled)
    assert irv_tabulate(BallotProfile(k=profile.k, lines=tuple(shuffled))).order == base.order
    units = tuple((r, 1) for r, count in profile.lines for _ in range(count))
    assert irv_tabulate(BallotProfile(k=profile.k, lines=units)).order == base.order
