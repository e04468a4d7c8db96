"""Independent oracles the test suite checks the package against.

Everything here is deliberately written from scratch with plain Python
containers and (where unavoidable) numpy, sharing no code paths with the
package: a naive round-by-round tabulator, exhaustive enumerations over
permutations, a direct multiplicative replay of the betting martingale, and
a grid search for the weighted simplex projection.
"""

from __future__ import annotations

import math
from itertools import permutations

import numpy as np


# ---------------------------------------------------------------------------
# IRV tabulation, recounted from scratch every round


def brute_force_tabulate(k, weighted_rankings, tie_lowest_index=True):
    """Returns (elimination order, per-round tallies dicts, per-round exhausted)."""
    standing = list(range(k))
    order = []
    tallies_per_round = []
    exhausted_per_round = []
    while len(standing) > 1:
        tallies = {c: 0 for c in standing}
        exhausted = 0
        for ranking, mult in weighted_rankings:
            vote = None
            for cand in ranking:
                if cand in standing:
                    vote = cand
                    break
            if vote is None:
                exhausted += mult
            else:
                tallies[vote] += mult
        tallies_per_round.append(dict(tallies))
        exhausted_per_round.append(exhausted)
        low = min(tallies.values())
        tied = sorted(c for c in standing if tallies[c] == low)
        loser = tied[0] if tie_lowest_index else tied[-1]
        order.append(loser)
        standing.remove(loser)
    order.append(standing[0])
    return order, tallies_per_round, exhausted_per_round


def brute_force_last_round_margin(k, weighted_rankings):
    order, tallies, _ = brute_force_tabulate(k, weighted_rankings)
    final = tallies[-1]
    winner, runner_up = order[-1], order[-2]
    total = sum(mult for _, mult in weighted_rankings)
    return (final[winner] - final[runner_up]) / total


# ---------------------------------------------------------------------------
# Alt-orders / requirements / registry sizes by exhaustive enumeration


def enumerate_alt_orders_naive(k, winner):
    return [p for p in permutations(range(k)) if p[-1] != winner]


def requirements_naive(order):
    """Set of (leader, trailer, frozenset standing) triples for one order."""
    out = []
    k = len(order)
    for t in range(k - 1):
        standing = frozenset(order[t:])
        loser = order[t]
        for i in order[t + 1:]:
            out.append((i, loser, standing))
    return out


def registry_size_naive(k, winner):
    """Distinct ordered pairs within every suffix set of every alt-order."""
    seen = set()
    for order in enumerate_alt_orders_naive(k, winner):
        for t in range(k - 1):
            standing = frozenset(order[t:])
            for i in standing:
                for j in standing:
                    if i != j:
                        seen.add((i, j, standing))
    return len(seen)


def used_assertions_naive(k, winner):
    seen = set()
    for order in enumerate_alt_orders_naive(k, winner):
        seen.update(requirements_naive(order))
    return seen


# ---------------------------------------------------------------------------
# Assorter population means from raw tallies


def restricted_tally_naive(weighted_rankings, standing, candidate):
    total = 0
    for ranking, mult in weighted_rankings:
        for cand in ranking:
            if cand in standing:
                if cand == candidate:
                    total += mult
                break
    return total


# ---------------------------------------------------------------------------
# Direct replay of the betting martingale (shrink/truncate estimate)


def alpha_trajectory(xs, N, eta0, d, c, eps=1e-6):
    """Cumulative log martingale after each draw, by direct multiplication.

    Mirrors the published estimator formulas; boundary draws (conditional
    null mean at or below 0, or at or above 1) follow the same conventions
    the package documents: all-in at zero, freeze at one.
    """
    S = 0.0
    logs = []
    log_m_total = 0.0
    for idx, x in enumerate(xs):
        j = idx + 1
        mu = (N * 0.5 - S) / (N - j + 1)
        if mu < 0:
            log_m_total = math.inf
        elif mu >= 1.0:
            pass  # increment 1
        else:
            denom = d + j - 1
            raw = (d * eta0 + S) / denom
            lower = mu + c / math.sqrt(denom)
            cap = 1.0 - eps
            eta = (mu + 1.0) / 2 if lower > cap else min(max(raw, lower), cap)
            if mu == 0.0:
                m = math.inf if x > 0 else 1.0 - eta
            else:
                m = x * eta / mu + (1 - x) * (1 - eta) / (1 - mu)
            log_m_total = log_m_total + (math.log(m) if math.isfinite(m) else math.inf)
        logs.append(log_m_total)
        S += x
    return logs


def first_crossing(xs, N, eta0, d, c, threshold, eps=1e-6):
    """First 1-based draw where the running martingale reaches the threshold."""
    for idx, log_m in enumerate(alpha_trajectory(xs, N, eta0, d, c, eps)):
        if log_m >= math.log(threshold):
            return idx + 1
    return None


# ---------------------------------------------------------------------------
# Weighted simplex projection by brute-force grid search


def grid_search_projection(y, A, coarse=2e-3, fine=1e-4):
    """argmin over the simplex of (q-y)'A(q-y) for r=3 by hierarchical grid.

    The objective is strictly convex (A is PD), so refining the coarse
    winner's neighbourhood cannot miss the optimum once the coarse grid is
    finer than the basin; the returned point is within the fine step of the
    true minimiser.
    """
    y = np.asarray(y, float)
    A = np.asarray(A, float)
    assert len(y) == 3

    def best_on(points):
        diff = points - y
        vals = np.einsum("ij,jk,ik->i", diff, A, diff)
        return points[int(np.argmin(vals))]

    def grid(center, half_width, step):
        lo = np.maximum(center[:2] - half_width, 0.0)
        hi = np.minimum(center[:2] + half_width, 1.0)
        a = np.arange(lo[0], hi[0] + step / 2, step)
        b = np.arange(lo[1], hi[1] + step / 2, step)
        aa, bb = np.meshgrid(a, b, indexing="ij")
        pts = np.stack([aa.ravel(), bb.ravel(), 1.0 - aa.ravel() - bb.ravel()], axis=1)
        return pts[pts[:, 2] >= -1e-12]

    best = best_on(grid(np.array([0.5, 0.5, 0.0]), 0.5, coarse))
    for step, width in ((coarse / 10, 2 * coarse), (fine, 2 * coarse / 10)):
        best = best_on(grid(best, width, step))
    return best
