"""Betting test supermartingale for "assorter mean < 1/2", sampled without replacement.

Each assertion gets one nonnegative process starting at 1.  Before draw j the
null (population mean at most 1/2) pins the conditional mean of the next
value at mu_j = (N/2 - S) / (N - j + 1), where S sums the values seen so
far.  The process multiplies by

    m_j = x * eta_j / mu_j + (1 - x) * (1 - eta_j) / (1 - mu_j)

which has conditional expectation m_j(mu_true) <= m_j(mu_j) = 1 under the
null, for any predictable eta_j in (mu_j, 1).  The shrink/truncate estimate
pulls eta_j from an initial guess eta0 (with weight d draws) toward the
running sample mean, clamped to stay above mu_j and below 1.

Boundary states are handled without float blow-ups:

* mu_j < 0: the null is impossible given the sample (S already exceeds N/2);
  the process is "proven" and carries an infinite sentinel.
* mu_j = 0: the null survives only if every remaining value is 0, so the
  whole fortune rides on that: m_j = 1 - eta_j when x = 0, infinite
  otherwise (this keeps the conditional expectation at most 1, which a hard
  transition to the infinite sentinel would not).
* mu_j >= 1: the null is certain from this sample; the process freezes and
  multiplies by 1 forever.

All accumulation is in log domain; the running maximum is kept because
rejection is "ever reaches 1/alpha".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

__all__ = ["AlphaParams", "AlphaState", "AlphaBank", "Status", "null_mean", "eta_shrink_trunc", "update"]

_VALID_X = (0.0, 0.5, 1.0)


class Status(IntEnum):
    ACTIVE = 0
    PROVEN = 1   # null impossible; martingale is an infinite sentinel
    FROZEN = 2   # null certain; increments pinned to 1


@dataclass(frozen=True)
class AlphaParams:
    """Tuning for the shrink/truncate mean estimate.

    eta0 is the initial estimate of the assorter mean, d the number of
    draws' worth of weight it keeps, c the bandwidth of the exploration
    floor above the null mean, eps the truncation gap below the upper
    bound u (fixed at 1 for this encoding).
    """

    eta0: float = 0.51
    d: float = 100.0
    c: float = None  # type: ignore[assignment]  # default derives from eta0
    eps: float = 1e-6
    u: float = 1.0
    null_mean: float = 0.5

    def __post_init__(self):
        if self.c is None:
            object.__setattr__(self, "c", (self.eta0 - self.null_mean) / 2)
        if self.u != 1.0:
            raise ValueError("assorter upper bound is fixed at 1")
        if not self.null_mean < self.eta0 <= self.u - self.eps:
            raise ValueError("need null_mean < eta0 <= u - eps")
        if self.d < 0:
            raise ValueError("d must be nonnegative")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 1/2)")


@dataclass
class AlphaState:
    """Mutable per-assertion test state; draw index j is 1-based."""

    N: int
    j: int = 1
    S_prev: float = 0.0
    log_M: float = 0.0
    log_M_max: float = 0.0
    status: Status = Status.ACTIVE

    @property
    def value(self) -> float:
        return math.exp(self.log_M) if math.isfinite(self.log_M) else math.inf


def null_mean(state: AlphaState) -> float:
    """Conditional null mean before draw j; flips status at the boundaries."""
    mu = (state.N * 0.5 - state.S_prev) / (state.N - state.j + 1)
    if state.status is Status.ACTIVE:
        if mu < 0.0:
            state.status = Status.PROVEN
            state.log_M = math.inf
        elif mu >= 1.0:
            state.status = Status.FROZEN
    return mu


def eta_shrink_trunc(state: AlphaState, params: AlphaParams) -> float:
    mu = (state.N * 0.5 - state.S_prev) / (state.N - state.j + 1)
    return _eta(state.S_prev, state.j, mu, params)


def _eta(S_prev: float, j: int, mu: float, p: AlphaParams) -> float:
    denom = p.d + j - 1
    raw = (p.d * p.eta0 + S_prev) / denom
    lower = mu + p.c / math.sqrt(denom)
    cap = p.u - p.eps
    if lower > cap:
        return (mu + p.u) / 2
    return min(max(raw, lower), cap)


def _increment(mu: float, eta: float, x: float) -> float:
    # linear in x; equals 1 at x = mu
    if mu == 0.0:
        return 1.0 - eta if x == 0.0 else math.inf
    return x * eta / mu + (1.0 - x) * (1.0 - eta) / (1.0 - mu)


def update(state: AlphaState, x: float, params: AlphaParams) -> float:
    """Consume one assorter value; returns the multiplicative increment m_j."""
    if x not in _VALID_X:
        raise ValueError(f"assorter values are 0, 1/2, or 1; got {x!r}")
    if state.j > state.N:
        raise ValueError("population exhausted")
    mu = null_mean(state)
    if state.status is Status.PROVEN:
        m = math.inf
    elif state.status is Status.FROZEN:
        m = 1.0
    else:
        m = _increment(mu, _eta(state.S_prev, state.j, mu, params), x)
        if math.isinf(m):
            state.status = Status.PROVEN
            state.log_M = math.inf
        else:
            state.log_M += math.log(m)
    state.log_M_max = max(state.log_M_max, state.log_M)
    state.S_prev += x
    state.j += 1
    return m


class AlphaBank:
    """Vectorised bank of test states, one per registered assertion.

    All states share the draw index (every assertion sees every sampled
    ballot), which keeps the update a handful of array operations.  Matches
    the scalar state arithmetic term for term.  A fast path covers the
    common case where every state is still betting strictly inside (0, 1);
    once any state touches a boundary the general masked path takes over.
    """

    def __init__(self, n: int, N: int, params: AlphaParams):
        self.n = n
        self.N = N
        self.params = params
        self.j = 1
        self.S_prev = np.zeros(n)
        self.log_M = np.zeros(n)
        self.status = np.zeros(n, dtype=np.int8)
        self._half_N = N * 0.5
        self._d_eta0 = params.d * params.eta0
        self._cap = params.u - params.eps
        self._plain = True            # no state has ever left the interior
        self._active_ids = np.arange(n)
        self._proven_ids = np.empty(0, dtype=np.int64)

    def _refresh_ids(self) -> None:
        self._active_ids = np.flatnonzero(self.status == Status.ACTIVE)
        self._proven_ids = np.flatnonzero(self.status == Status.PROVEN)

    def update(self, x: np.ndarray) -> np.ndarray:
        """Advance every state with the ballot's assorter values; returns increments."""
        p = self.params
        inv = 1.0 / (self.N - self.j + 1)
        sq = p.d + self.j - 1
        c_term = p.c / math.sqrt(sq)

        if self._plain:
            mu = (self._half_N - self.S_prev) * inv
            if mu.min() > 0.0 and mu.max() + c_term <= self._cap:
                raw = (self._d_eta0 + self.S_prev) / sq
                eta = np.minimum(np.maximum(raw, mu + c_term), self._cap)
                m = x * (eta / mu) + (1.0 - x) * ((1.0 - eta) / (1.0 - mu))
                self.log_M += np.log(m)
                self.S_prev += x
                self.j += 1
                return m
            self._plain = False

        ids = self._active_ids
        m = np.ones(self.n)
        m[self._proven_ids] = np.inf
        changed = False

        if ids.size:
            S_a = self.S_prev[ids]
            mu_a = (self._half_N - S_a) * inv
            x_a = x[ids]
            proven = mu_a < 0.0
            frozen = mu_a >= 1.0
            live = ~(proven | frozen)
            if proven.any() or frozen.any():
                self.status[ids[proven]] = Status.PROVEN
                self.log_M[ids[proven]] = np.inf
                m[ids[proven]] = np.inf
                self.status[ids[frozen]] = Status.FROZEN
                changed = True
                S_a, mu_a, x_a = S_a[live], mu_a[live], x_a[live]
                ids = ids[live]
            raw = (self._d_eta0 + S_a) / sq
            lower = mu_a + c_term
            eta = np.minimum(np.maximum(raw, lower), self._cap)
            over = lower > self._cap
            if over.any():
                eta[over] = (mu_a[over] + p.u) / 2
            with np.errstate(divide="ignore", invalid="ignore"):
                term1 = np.where(x_a == 0.0, 0.0, x_a * eta / mu_a)
            m_a = term1 + (1.0 - x_a) * ((1.0 - eta) / (1.0 - mu_a))
            m[ids] = m_a
            with np.errstate(divide="ignore"):
                self.log_M[ids] += np.log(m_a)
            blown = np.isinf(m_a)
            if blown.any():
                self.status[ids[blown]] = Status.PROVEN
                self.log_M[ids[blown]] = np.inf
                changed = True

        if changed:
            self._refresh_ids()
        self.S_prev += x
        self.j += 1
        return m
