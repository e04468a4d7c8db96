"""Alternative elimination orders, directly-beats assertions, and assorters.

To confirm a reported winner we must refute every elimination order that
ends with someone else (an alt-order).  An alt-order is pinned down by
pairwise "directly beats" conditions: at each of its elimination steps, every
other standing candidate must out-tally the one eliminated.  Those
conditions repeat heavily across alt-orders, so they are deduplicated into a
registry and each order keeps indices into it.

An assorter turns one ballot into evidence about one assertion: 1 if the
ballot's first standing choice is the asserted trailer (evidence against the
assertion), 0 if it is the asserted leader (evidence for), else 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial
from typing import Sequence

import numpy as np

from .ballots import Ranking, restricted_first_choice

__all__ = [
    "Assertion",
    "AssertionRegistry",
    "enumerate_alt_orders",
    "requirements_for_order",
    "build_registry",
    "assort",
    "n_alt_orders",
    "n_requirements_per_order",
    "mask_of",
    "mask_members",
]


def mask_of(candidates) -> int:
    m = 0
    for c in candidates:
        m |= 1 << c
    return m


def mask_members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True, order=True)
class Assertion:
    """Candidate ``i`` directly beats ``j`` when exactly ``standing`` remain.

    ``standing`` is a bitmask over candidate indices containing both i and j.
    """

    i: int
    j: int
    standing: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("an assertion needs two distinct candidates")
        if not (self.standing >> self.i) & 1 or not (self.standing >> self.j) & 1:
            raise ValueError("i and j must both be standing")

    def key(self) -> tuple[int, int, int]:
        # canonical ordering used for registry indices
        return (self.standing, self.j, self.i)


def n_alt_orders(k: int) -> int:
    return factorial(k) - factorial(k - 1)


def n_requirements_per_order(k: int) -> int:
    return sum(k - t for t in range(1, k))


def enumerate_alt_orders(k: int, reported_winner: int) -> list[tuple[int, ...]]:
    """All elimination orders whose winner differs from the reported one.

    Lexicographic over permutations of 0..k-1, so indices are stable.
    """
    if k < 2:
        raise ValueError("need at least two candidates")
    if not 0 <= reported_winner < k:
        raise ValueError("reported winner out of range")
    return [p for p in permutations(range(k)) if p[-1] != reported_winner]


def requirements_for_order(order: Sequence[int]) -> list[Assertion]:
    """Directly-beats conditions that must all hold for ``order`` to be true.

    At step t the eliminated candidate had the fewest votes among the
    standing set, i.e. every other standing candidate directly beats it.
    """
    k = len(order)
    if sorted(order) != list(range(k)):
        raise ValueError("order must be a permutation of 0..k-1")
    out = []
    for t in range(k - 1):
        standing = mask_of(order[t:])
        eliminated = order[t]
        for i in order[t + 1:]:
            out.append(Assertion(i=i, j=eliminated, standing=standing))
    return out


class AssertionRegistry:
    """Deduplicated assertion table shared by every alt-order.

    Holds one entry per ordered candidate pair within each standing set
    realisable as an alt-order suffix, indexed in (standing, j, i) order, so
    indices are deterministic for a fixed roster and reported winner.
    """

    def __init__(self, assertions: Sequence[Assertion]):
        self.assertions: tuple[Assertion, ...] = tuple(sorted(assertions, key=Assertion.key))
        self.index: dict[tuple[int, int, int], int] = {
            a.key(): n for n, a in enumerate(self.assertions)
        }
        self.i_arr = np.array([a.i for a in self.assertions], dtype=np.int64)
        self.j_arr = np.array([a.j for a in self.assertions], dtype=np.int64)
        self.standing_arr = np.array([a.standing for a in self.assertions], dtype=np.int64)
        by_standing: dict[int, list[int]] = {}
        for n, a in enumerate(self.assertions):
            by_standing.setdefault(a.standing, []).append(n)
        self.by_standing: dict[int, np.ndarray] = {
            s: np.array(ids, dtype=np.int64) for s, ids in sorted(by_standing.items())
        }

    def __len__(self) -> int:
        return len(self.assertions)

    def id_of(self, a: Assertion) -> int:
        return self.index[a.key()]

    def assort_vector(self, ranking: Ranking) -> np.ndarray:
        """Assorter values of one ballot against every registered assertion."""
        x = np.full(len(self.assertions), 0.5)
        for standing, ids in self.by_standing.items():
            f = restricted_first_choice(ranking, mask_members(standing))
            if f is None:
                continue
            x[ids] = np.where(
                self.j_arr[ids] == f, 1.0, np.where(self.i_arr[ids] == f, 0.0, 0.5)
            )
        return x

    def export(self, orders=None, requirement_ids=None) -> dict:
        """Structured dump for fixtures and the console explanation view."""
        doc = {
            "assertions": [
                {"id": n, "leader": a.i, "trailer": a.j, "standing": list(mask_members(a.standing))}
                for n, a in enumerate(self.assertions)
            ]
        }
        if orders is not None and requirement_ids is not None:
            doc["alt_orders"] = [
                {"order": list(o), "requirement_ids": list(map(int, ids))}
                for o, ids in zip(orders, requirement_ids)
            ]
        return doc


def build_registry(
    alt_orders: Sequence[Sequence[int]],
) -> tuple[AssertionRegistry, list[list[int]]]:
    """Registry over all alt-order suffix sets plus per-order requirement ids.

    The registry covers every ordered pair within each suffix standing set
    (a handful of entries are never referenced by any alt-order; keeping the
    table winner-agnostic keeps indices reusable across reported outcomes).
    """
    suffix_sets: set[int] = set()
    for order in alt_orders:
        for t in range(len(order) - 1):
            suffix_sets.add(mask_of(order[t:]))
    assertions = []
    for standing in suffix_sets:
        members = mask_members(standing)
        for j in members:
            for i in members:
                if i != j:
                    assertions.append(Assertion(i=i, j=j, standing=standing))
    registry = AssertionRegistry(assertions)
    requirement_ids = [
        [registry.id_of(a) for a in requirements_for_order(order)] for order in alt_orders
    ]
    return registry, requirement_ids


def assort(a: Assertion, ranking: Ranking) -> float:
    """Evidence of one ballot about one assertion: 1 against, 0 for, 1/2 neutral."""
    f = restricted_first_choice(ranking, mask_members(a.standing))
    if f == a.j:
        return 1.0
    if f == a.i:
        return 0.0
    return 0.5
