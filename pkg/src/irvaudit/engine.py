"""Sequential audit: shared base martingales, per-alt-order intersections, stopping.

One audit tracks every elimination order that would crown someone other
than the reported winner.  Each sampled ballot updates a bank of per-
assertion test supermartingales once (assertions are shared across
alt-orders), then every still-standing alt-order folds its requirements'
increments into its intersection supermartingale using the configured
weighting scheme.  An alt-order is rejected, permanently, once its
intersection has ever reached 1/alpha; the audit certifies when every
alt-order is rejected, or ends in a full count when the population is
exhausted first.

The inner loop is array-shaped on purpose: requirement ids form a dense
(orders x requirements) matrix, so one draw costs a handful of vector
operations regardless of how many alt-orders remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .alpha import AlphaBank, AlphaParams
from .assertions import build_registry, enumerate_alt_orders
from .weights import SchemeBank, SchemeSpec

__all__ = ["AuditConfig", "AuditState", "StepReport", "AuditOutcome", "new_audit", "InvalidRankingError"]


class InvalidRankingError(ValueError):
    pass


@dataclass(frozen=True)
class AuditConfig:
    k: int
    reported_winner: int
    N: int
    scheme: SchemeSpec
    alpha: AlphaParams
    risk_limit: float = 0.05
    k_limit: int = 6

    def __post_init__(self):
        if not 0.0 < self.risk_limit < 1.0:
            raise ValueError("risk limit must lie in (0, 1)")
        if self.N < 1:
            raise ValueError("population must be positive")
        if self.k < 2:
            raise ValueError("need at least two candidates")
        if not 0 <= self.reported_winner < self.k:
            raise ValueError("reported winner out of range")


@dataclass
class StepReport:
    draws_seen: int
    status: str
    certified: bool
    p_proxy: float
    n_rejected: int
    n_trackers: int
    tracker_log_max: np.ndarray


@dataclass(frozen=True)
class AuditOutcome:
    status: str           # "certified" or "full_count"
    draws_seen: int
    certified_at: Optional[int]


# (alt_orders, registry, requirement matrix) depend only on the roster size
# and reported winner; replicated simulations reuse them across audits
_STRUCTURE_CACHE: dict = {}


def _audit_structure(k: int, reported_winner: int):
    key = (k, reported_winner)
    if key not in _STRUCTURE_CACHE:
        alt_orders = enumerate_alt_orders(k, reported_winner)
        registry, requirement_ids = build_registry(alt_orders)
        _STRUCTURE_CACHE[key] = (alt_orders, registry, np.array(requirement_ids, dtype=np.int64))
    return _STRUCTURE_CACHE[key]


class AuditState:
    """Everything one running audit owns; single logical writer at a time."""

    def __init__(self, config: AuditConfig):
        if config.k > config.k_limit:
            raise ValueError(
                f"{config.k} candidates exceeds the supported limit of {config.k_limit} "
                "(tracker count grows factorially; raise k_limit to override)"
            )
        self.config = config
        self.alt_orders, self.registry, self.R = _audit_structure(config.k, config.reported_winner)
        n_orders, r = self.R.shape
        self.bank = AlphaBank(len(self.registry), config.N, config.alpha)
        self.schemes = SchemeBank(config.scheme, n_orders, r)
        self.log_threshold = -math.log(config.risk_limit)
        self.log_int = np.zeros(n_orders)
        self.log_int_max = np.zeros(n_orders)
        self.rejected = np.zeros(n_orders, dtype=bool)
        self.draws_seen = 0
        self.status = "running"
        self.ballot_log: list = []
        # gathers reused across draws; refreshed only when a tracker rejects
        self._active = np.arange(n_orders)
        self._R_active = self.R

    @property
    def n_trackers(self) -> int:
        return len(self.alt_orders)

    # -- core update ---------------------------------------------------

    def _step(self, x: np.ndarray, log_entry=None) -> None:
        if self.status != "running":
            raise RuntimeError(f"audit is {self.status}")
        active, R_active = self._active, self._R_active
        logM_prev = self.bank.log_M[R_active]
        m = self.bank.update(x)
        m_req = m[R_active]
        inc = self.schemes.increments(active, logM_prev, m_req)
        with np.errstate(divide="ignore"):
            log_int = self.log_int[active] + np.log(inc)
        self.log_int[active] = log_int
        log_max = np.maximum(self.log_int_max[active], log_int)
        self.log_int_max[active] = log_max
        newly = log_max >= self.log_threshold
        if newly.any():
            self.rejected[active[newly]] = True
            keep = ~newly
            self._active = active[keep]
            self._R_active = R_active[keep]
            if self.schemes.needs_record:
                self.schemes.record(self._active, self.bank.log_M[self._R_active], m_req[keep])
            else:
                self.schemes.record(self._active, None, m_req[keep])
        elif self.schemes.needs_record:
            self.schemes.record(active, self.bank.log_M[R_active], m_req)
        else:
            self.schemes.record(active, None, m_req)
        self.draws_seen += 1
        self.ballot_log.append(log_entry)
        if self.rejected.all():
            self.status = "certified"
        elif self.draws_seen >= self.config.N:
            self.status = "full_count"

    def _validate(self, ranking: Sequence[int]) -> tuple[int, ...]:
        ranking = tuple(ranking)
        for c in ranking:
            if not 0 <= c < self.config.k:
                raise InvalidRankingError(f"candidate index {c} out of range")
        if len(set(ranking)) != len(ranking):
            raise InvalidRankingError("candidate repeated within ranking")
        return ranking

    def process_ballot(self, ranking: Sequence[int]) -> StepReport:
        """Consume one sampled ballot (a ranking of candidate indices)."""
        ranking = self._validate(ranking)
        self._step(self.registry.assort_vector(ranking), log_entry=ranking)
        return StepReport(
            draws_seen=self.draws_seen,
            status=self.status,
            certified=self.status == "certified",
            p_proxy=self.p_proxy(),
            n_rejected=int(self.rejected.sum()),
            n_trackers=self.n_trackers,
            tracker_log_max=self.log_int_max.copy(),
        )

    def run_to_completion(self, ballots: Iterable[Sequence[int]]) -> AuditOutcome:
        """Consume ballots until certified or the population is exhausted."""
        if self.status != "running":
            return self._outcome()
        it: Iterator = iter(ballots)
        while self.status == "running":
            try:
                ranking = next(it)
            except StopIteration:
                raise ValueError(
                    f"ballot stream ended after {self.draws_seen} draws with the audit still running"
                ) from None
            ranking = self._validate(ranking)
            self._step(self.registry.assort_vector(ranking), log_entry=ranking)
        return self._outcome()

    def run_assort_rows(self, assort_matrix: np.ndarray, row_order: np.ndarray) -> AuditOutcome:
        """Fast path for simulations: ballots given as precomputed assorter rows."""
        if self.status != "running":
            return self._outcome()
        for row in row_order:
            self._step(assort_matrix[row])
            if self.status != "running":
                break
        if self.status == "running":
            raise ValueError("assort stream exhausted before the population")
        return self._outcome()

    def _outcome(self) -> AuditOutcome:
        return AuditOutcome(
            status=self.status,
            draws_seen=self.draws_seen,
            certified_at=self.draws_seen if self.status == "certified" else None,
        )

    # -- snapshots -------------------------------------------------------

    def p_proxy(self) -> float:
        return min(1.0, math.exp(-float(self.log_int_max.min())))

    def status_snapshot(self, top_n: int = 10) -> dict:
        """Point-in-time view of the stopping data (pure, JSON-friendly)."""
        min_log = float(self.log_int_max.min())
        order_idx = np.argsort(self.log_int_max, kind="stable")[:top_n]
        hardest = [
            {
                "order": list(self.alt_orders[i]),
                "max_martingale_log10": _log10_or_none(self.log_int_max[i]),
                "rejected": bool(self.rejected[i]),
                "progress": _progress(self.log_int_max[i], self.log_threshold),
            }
            for i in order_idx
        ]
        return {
            "status": self.status,
            "draws_seen": self.draws_seen,
            "population": self.config.N,
            "n_trackers": self.n_trackers,
            "certified_fraction": float(self.rejected.mean()),
            "min_max_martingale_log10": _log10_or_none(min_log),
            "p_proxy": self.p_proxy(),
            "risk_limit": self.config.risk_limit,
            "hardest": hardest,
        }

    # -- replay ------------------------------------------------------------

    @classmethod
    def replay(cls, config: AuditConfig, rankings: Iterable[Sequence[int]]) -> "AuditState":
        """Fresh state advanced through the given ballots (undo support)."""
        state = cls(config)
        for ranking in rankings:
            state.process_ballot(ranking)
        return state


def _log10_or_none(log_value: float) -> Optional[float]:
    if math.isinf(log_value):
        return None
    return float(log_value) / math.log(10.0)


def _progress(log_value: float, log_threshold: float) -> float:
    if math.isinf(log_value):
        return 1.0
    return min(1.0, max(0.0, float(log_value) / log_threshold))


def new_audit(config: AuditConfig) -> AuditState:
    return AuditState(config)
