"""Predictable weighting schemes for intersection test supermartingales.

Each alt-order combines its requirements' base test supermartingales into a
single process by multiplying, at every step, the weighted average of the
base increments:

    intersection step t factor = sum_r w[r] * m[r, t] / sum_r w[r]

The weights may use anything observed up to step t-1, nothing later.  The
schemes here range from myopic functions of the previous base values
(linear, quadratic, largest, and their gated "+" variants) to windowed
leader counts and trailing means, plus an online Newton step portfolio that
treats base increments as price relatives.

A base value of +inf (an assertion whose null became impossible) dominates
every scheme: all weight collapses onto the infinite entries.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .projection import project_simplex_metric

__all__ = [
    "SchemeSpec",
    "SchemeState",
    "OnsState",
    "parse_scheme",
    "SCHEME_GRAMMAR",
    "compute_weights",
    "record_step",
    "ons_step",
    "new_scheme_state",
    "intersection_trajectory",
    "SchemeBank",
]

MYOPIC_KINDS = ("linear", "quadratic", "largest", "linear-plus", "quadratic-plus")
WINDOW_KINDS = ("largest-count", "largest-mean", "linear-count", "linear-mean")
ALL_KINDS = MYOPIC_KINDS + WINDOW_KINDS + ("ons",)

SCHEME_GRAMMAR = (
    "linear | quadratic | largest | linear-plus | quadratic-plus | "
    "largest-count:W | largest-mean:W | linear-count:W | linear-mean:W | ons:DELTA"
)


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    window: Optional[int] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; grammar: {SCHEME_GRAMMAR}")
        if self.kind in WINDOW_KINDS:
            if self.window is None or self.window < 1:
                raise ValueError(f"{self.kind} needs a window of at least 1")
        elif self.window is not None:
            raise ValueError(f"{self.kind} takes no window")
        if self.kind == "ons":
            if self.delta is None or self.delta <= 2:
                raise ValueError("ons needs delta > 2")
        elif self.delta is not None:
            raise ValueError(f"{self.kind} takes no delta")

    def __str__(self) -> str:
        if self.kind in WINDOW_KINDS:
            return f"{self.kind}:{self.window}"
        if self.kind == "ons":
            return f"ons:{self.delta:g}"
        return self.kind


def parse_scheme(text: str) -> SchemeSpec:
    """Parse a scheme spec string (see SCHEME_GRAMMAR)."""
    text = text.strip().lower()
    if ":" in text:
        kind, _, arg = text.partition(":")
        kind = kind.strip()
        arg = arg.strip()
        if kind == "ons":
            try:
                return SchemeSpec(kind="ons", delta=float(arg))
            except ValueError as exc:
                raise ValueError(f"bad ons delta {arg!r}: {exc}") from None
        try:
            window = int(arg)
        except ValueError:
            raise ValueError(f"bad window {arg!r} for scheme {kind!r}") from None
        return SchemeSpec(kind=kind, window=window)
    return SchemeSpec(kind=text)


# ---------------------------------------------------------------------------
# Scalar per-order state (reference path; the engine uses SchemeBank)


@dataclass
class OnsState:
    A: np.ndarray
    b: np.ndarray
    p: np.ndarray

    @classmethod
    def fresh(cls, r: int) -> "OnsState":
        return cls(A=np.eye(r), b=np.zeros(r), p=np.full(r, 1.0 / r))


class SchemeState:
    """History one alt-order's scheme needs: a value window and/or ONS state."""

    def __init__(self, spec: SchemeSpec, r: int):
        self.spec = spec
        self.r = r
        self.history: deque[np.ndarray] = deque(maxlen=spec.window or 1)
        self.ons = OnsState.fresh(r) if spec.kind == "ons" else None


def new_scheme_state(spec: SchemeSpec, r: int) -> SchemeState:
    return SchemeState(spec, r)


def _argmax_mask(values: np.ndarray) -> np.ndarray:
    return values == values.max()


def compute_weights(spec: SchemeSpec, state: SchemeState, M_prev: Sequence[float]) -> np.ndarray:
    """Weights for the upcoming step, from base values at the previous step.

    Only past data flows in: M_prev are the base supermartingale values after
    step t-1 and the window buffers hold steps up to t-1.  Always returns
    w >= 0 with a positive sum; argmax ties split weight equally.
    """
    M = np.asarray(M_prev, dtype=float)
    r = state.r
    inf = np.isinf(M)
    if inf.any():
        return inf.astype(float) / inf.sum()

    kind = spec.kind
    if kind == "linear":
        return M.copy()
    if kind == "quadratic":
        return M * M
    if kind == "largest":
        mask = _argmax_mask(M)
        return mask / mask.sum()
    if kind == "linear-plus":
        if M.max() > 1.0:
            return np.where(M < 1.0, 0.0, M)
        return M.copy()
    if kind == "quadratic-plus":
        if M.max() > 1.0:
            return np.where(M < 1.0, 0.0, M * M)
        return M * M
    if kind == "ons":
        return state.ons.p.copy()

    # windowed kinds warm up uniformly until one step of history exists
    if not state.history:
        return np.full(r, 1.0 / r)
    window = np.stack(state.history)
    if kind == "largest-count":
        counts = sum(_argmax_mask(row) for row in window).astype(float)
        mask = _argmax_mask(counts)
        return mask / mask.sum()
    if kind == "largest-mean":
        mask = _argmax_mask(window.mean(axis=0))
        return mask / mask.sum()
    if kind == "linear-count":
        return sum(_argmax_mask(row) for row in window).astype(float)
    if kind == "linear-mean":
        return window.mean(axis=0)
    raise AssertionError(f"unhandled scheme {kind}")


def ons_step(state: OnsState, x: Sequence[float], delta: float) -> np.ndarray:
    """Online Newton step: fold in one increment vector, return the next portfolio.

    Uses beta = 1 and no uniform mixing; the projection onto the simplex is
    in the norm induced by the accumulated second-moment matrix.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("ons needs strictly positive finite increments")
    g = x / float(state.p @ x)
    state.A += np.outer(g, g)
    state.b += 2.0 * g
    y = delta * np.linalg.solve(state.A, state.b)
    state.p = project_simplex_metric(y, state.A)
    return state.p


def record_step(spec: SchemeSpec, state: SchemeState, M_t: Sequence[float], m_t: Sequence[float]) -> None:
    """Advance history after the step-t intersection update has been applied."""
    if spec.kind in WINDOW_KINDS:
        state.history.append(np.asarray(M_t, dtype=float).copy())
    elif spec.kind == "ons":
        ons_step(state.ons, m_t, spec.delta)


def intersection_trajectory(spec: SchemeSpec, increments: np.ndarray):
    """Run one alt-order's intersection supermartingale over an increment stream.

    ``increments`` is (steps, r) of strictly positive base increments.
    Returns (intersection values including the starting 1, weights used per
    step).  Reference implementation used by tests; the engine's vectorised
    path must agree with it.
    """
    increments = np.asarray(increments, dtype=float)
    steps, r = increments.shape
    state = new_scheme_state(spec, r)
    M_base = np.ones(r)
    M_int = np.empty(steps + 1)
    M_int[0] = 1.0
    weights = np.empty((steps, r))
    for t in range(steps):
        w = compute_weights(spec, state, M_base)
        weights[t] = w
        m_t = increments[t]
        M_int[t + 1] = M_int[t] * float(w @ m_t) / float(w.sum())
        M_base = M_base * m_t
        record_step(spec, state, M_base, m_t)
    return M_int, weights


# ---------------------------------------------------------------------------
# Vectorised bank: every alt-order's scheme state advanced together


class SchemeBank:
    """Scheme state for all alt-orders at once, driven by (orders, r) matrices.

    Works in the log domain for base values so long audits cannot overflow;
    weight formulas are scale invariant within each row, which makes the
    exp(log M - rowmax) trick exact for the linear/quadratic families.
    """

    def __init__(self, spec: SchemeSpec, n_orders: int, r: int):
        self.spec = spec
        self.n_orders = n_orders
        self.r = r
        self.t = 1
        self.needs_record = spec.kind in WINDOW_KINDS   # caller must gather post-step base values
        if spec.kind in WINDOW_KINDS:
            self.buf = np.zeros((n_orders, r, spec.window))
        if spec.kind == "ons":
            self.A = np.broadcast_to(np.eye(r), (n_orders, r, r)).copy()
            self.b = np.zeros((n_orders, r))
            self.p = np.full((n_orders, r), 1.0 / r)

    def _filled(self) -> int:
        return min(self.spec.window, self.t - 1)

    def _window_weights(self, rows: np.ndarray) -> np.ndarray:
        kind = self.spec.kind
        filled = self._filled()
        if filled == 0:
            return np.full((len(rows), self.r), 1.0 / self.r)
        buf = self.buf[rows][:, :, :filled] if filled < self.spec.window else self.buf[rows]
        if kind in ("largest-count", "linear-count"):
            lead = buf == buf.max(axis=1, keepdims=True)
            counts = lead.sum(axis=2).astype(float)
            if kind == "linear-count":
                return counts
            mask = counts == counts.max(axis=1, keepdims=True)
            return mask / mask.sum(axis=1, keepdims=True)
        # trailing means of the base values, per-row rescaled for stability
        c = buf.max(axis=(1, 2), keepdims=True)
        means = np.exp(buf - c).mean(axis=2)
        if kind == "linear-mean":
            return means
        mask = means == means.max(axis=1, keepdims=True)
        return mask / mask.sum(axis=1, keepdims=True)

    def weights(self, rows: np.ndarray, logM_prev: np.ndarray) -> np.ndarray:
        """Weight matrix for the given active rows; logM_prev is (len(rows), r)."""
        kind = self.spec.kind
        if kind == "ons":
            return np.maximum(self.p[rows], 0.0)
        if kind in WINDOW_KINDS:
            return self._window_weights(rows)
        rowmax = logM_prev.max(axis=1, keepdims=True)
        if kind == "largest":
            mask = logM_prev == rowmax
            return mask / mask.sum(axis=1, keepdims=True)
        if kind == "linear":
            return np.exp(logM_prev - rowmax)
        if kind == "quadratic":
            return np.exp(2.0 * (logM_prev - rowmax))
        w = np.exp(logM_prev - rowmax) if kind == "linear-plus" else np.exp(2.0 * (logM_prev - rowmax))
        gated = rowmax[:, 0] > 0.0
        w[gated[:, None] & (logM_prev < 0.0)] = 0.0
        return w

    def increments(self, rows: np.ndarray, logM_prev: np.ndarray, m: np.ndarray) -> np.ndarray:
        """Intersection factors for the active rows given base increments m.

        Any infinite base increment forces an infinite factor: that
        assertion's null is impossible, so every alt-order requiring it is
        refuted outright.
        """
        inf_mask = np.isinf(m)
        blown = inf_mask.any(axis=1)
        if blown.any():
            m = np.where(inf_mask, 0.0, m)  # value irrelevant, row forced below
        if self.spec.kind == "largest":
            rowmax = logM_prev.max(axis=1, keepdims=True)
            mask = logM_prev == rowmax
            inc = np.einsum("ij,ij->i", m, mask) / mask.sum(axis=1)
        else:
            w = self.weights(rows, logM_prev)
            inc = np.einsum("ij,ij->i", w, m) / w.sum(axis=1)
        if blown.any():
            inc[blown] = np.inf
        return inc

    def record(self, rows: np.ndarray, logM_now, m: np.ndarray) -> None:
        """Advance buffers to the step just consumed (rows still in play).

        ``logM_now`` (post-step base values, log domain) is only consulted
        when ``needs_record`` is set; myopic kinds pass None.
        """
        spec = self.spec
        if spec.kind in WINDOW_KINDS:
            pos = (self.t - 1) % spec.window
            self.buf[rows, :, pos] = logM_now
        elif spec.kind == "ons":
            finite = np.isfinite(m).all(axis=1) & (m > 0).all(axis=1)
            for n, row in enumerate(rows):
                if not finite[n]:
                    continue
                x = m[n]
                p = np.maximum(self.p[row], 0.0)
                g = x / float(p @ x)
                self.A[row] += np.outer(g, g)
                self.b[row] += 2.0 * g
                y = spec.delta * np.linalg.solve(self.A[row], self.b[row])
                self.p[row] = project_simplex_metric(y, self.A[row])
        self.t += 1
