"""Risk-limiting audits for instant-runoff contests, no cast-vote records needed."""

from .alpha import AlphaParams, AlphaState, Status
from .assertions import Assertion, AssertionRegistry, build_registry, enumerate_alt_orders
from .ballots import (
    BallotProfile,
    Candidate,
    Contest,
    EliminationRecord,
    irv_tabulate,
    margin_category,
    parse_profile,
)
from .engine import AuditConfig, AuditOutcome, AuditState, new_audit
from .fixtures import fixture_contest, two_finalist_contest
from .sim import SimPlan, SimRecord, aggregate, compare_reduction, emit_report, run_plan, simulate_audit
from .weights import SCHEME_GRAMMAR, SchemeSpec, parse_scheme

__version__ = "0.1.0"
