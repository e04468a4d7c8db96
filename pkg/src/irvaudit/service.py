"""HTTP session service for live audits.

A session wraps one running audit.  Auditors create a session with the
roster and audit parameters, then POST each physically drawn ballot; the
reply says whether the audit can stop.  Mistyped ballots can be undone,
which rebuilds the state from scratch so rejection latches are recomputed
on the shorter prefix.

Every mutation is journaled (append-only JSON lines, first line holds the
configuration) before the reply is sent, so restarting the process with the
same journal directory reproduces every session exactly.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .alpha import AlphaParams
from .engine import AuditConfig, AuditState, InvalidRankingError
from .weights import parse_scheme

__all__ = ["create_app", "Session"]


class CreateSessionRequest(BaseModel):
    candidates: list[str] = Field(min_length=2)
    reported_winner: str
    N: int = Field(gt=0)
    risk: float = 0.05
    scheme: str = "largest"
    eta0: float = 0.51
    d: float = 100.0
    c: Optional[float] = None
    eps: float = 1e-6
    id: Optional[str] = None


class BallotRequest(BaseModel):
    ranking: list[str]


class Session:
    """One audit plus its journal; all mutations hold the per-session lock."""

    def __init__(self, session_id: str, request: CreateSessionRequest, journal_path: Path,
                 replaying: bool = False):
        self.id = session_id
        self.names = list(request.candidates)
        self.request = request
        self.created = time.time()
        self.journal_path = journal_path
        self.lock = threading.Lock()
        self.ballots: list[list[str]] = []
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate candidate name")
        if request.reported_winner not in self.names:
            raise ValueError(f"reported winner {request.reported_winner!r} not in roster")
        config = AuditConfig(
            k=len(self.names),
            reported_winner=self.names.index(request.reported_winner),
            N=request.N,
            scheme=parse_scheme(request.scheme),
            alpha=AlphaParams(eta0=request.eta0, d=request.d, c=request.c, eps=request.eps),
            risk_limit=request.risk,
        )
        self.state = AuditState(config)
        if not replaying:
            self._append({"op": "config", "id": session_id, **request.model_dump()})

    # -- journal ---------------------------------------------------------

    def _append(self, doc: dict) -> None:
        with open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, separators=(",", ":")) + "\n")
            fh.flush()

    def _indices(self, ranking: list[str]) -> tuple[int, ...]:
        try:
            return tuple(self.names.index(name) for name in ranking)
        except ValueError:
            unknown = next(n for n in ranking if n not in self.names)
            raise InvalidRankingError(f"unknown candidate {unknown!r}") from None

    # -- operations --------------------------------------------------------

    def submit(self, ranking: list[str]) -> dict:
        if self.state.status != "running":
            raise SessionNotRunning(self.state.status)
        indices = self._indices(ranking)
        if len(set(indices)) != len(indices):
            raise InvalidRankingError("candidate repeated within ranking")
        self._append({"op": "ballot", "ranking": ranking})
        self.state.process_ballot(indices)
        self.ballots.append(list(ranking))
        doc = self.status_doc(top_n=5)
        doc["certified"] = self.state.status == "certified"
        return doc

    def undo(self) -> dict:
        if not self.ballots:
            raise NothingToUndo()
        self._append({"op": "undo"})
        self.ballots.pop()
        self.state = AuditState.replay(self.state.config, [self._indices(b) for b in self.ballots])
        return self.status_doc()

    def status_doc(self, top_n: int = 10) -> dict:
        doc = self.state.status_snapshot(top_n=top_n)
        for entry in doc["hardest"]:
            entry["order"] = [self.names[c] for c in entry["order"]]
        doc["id"] = self.id
        doc["candidates"] = self.names
        doc["reported_winner"] = self.names[self.state.config.reported_winner]
        doc["scheme"] = str(self.state.config.scheme)
        return doc

    def apply_journal_line(self, doc: dict) -> None:
        if doc["op"] == "ballot":
            self.ballots.append(doc["ranking"])
            self.state.process_ballot(self._indices(doc["ranking"]))
        elif doc["op"] == "undo":
            self.ballots.pop()
            self.state = AuditState.replay(
                self.state.config, [self._indices(b) for b in self.ballots]
            )
        else:
            raise ValueError(f"unknown journal op {doc['op']!r}")


class SessionNotRunning(RuntimeError):
    pass


class NothingToUndo(RuntimeError):
    pass


def _load_journal(path: Path) -> Optional[Session]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("op") != "config":
        return None
    head = dict(lines[0])
    head.pop("op")
    session_id = head.pop("id")
    session = Session(session_id, CreateSessionRequest(**head), path, replaying=True)
    for doc in lines[1:]:
        session.apply_journal_line(doc)
    return session


def create_app(journal_dir="journals") -> FastAPI:
    """Build the service; existing journals in ``journal_dir`` are replayed."""
    journal_dir = Path(journal_dir)
    journal_dir.mkdir(parents=True, exist_ok=True)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    for path in sorted(journal_dir.glob("*.jsonl")):
        session = _load_journal(path)
        if session is not None:
            sessions[session.id] = session

    app = FastAPI(title="irvaudit session service")

    def _get(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"no session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest):
        session_id = request.id or uuid.uuid4().hex[:12]
        with registry_lock:
            if session_id in sessions:
                raise HTTPException(409, f"session {session_id!r} already exists")
            try:
                session = Session(session_id, request, journal_dir / f"{session_id}.jsonl")
            except ValueError as exc:
                raise HTTPException(400, str(exc)) from None
            sessions[session_id] = session
        return session.status_doc()

    @app.get("/sessions")
    def list_sessions():
        with registry_lock:
            items = sorted(sessions.values(), key=lambda s: s.created)
        return [
            {
                "id": s.id,
                "status": s.state.status,
                "draws_seen": s.state.draws_seen,
                "p_proxy": s.state.p_proxy(),
            }
            for s in items
        ]

    @app.get("/sessions/{session_id}")
    def get_status(session_id: str, top: int = 10):
        session = _get(session_id)
        with session.lock:
            return session.status_doc(top_n=top)

    @app.post("/sessions/{session_id}/ballots")
    def submit_ballot(session_id: str, ballot: BallotRequest):
        session = _get(session_id)
        with session.lock:
            try:
                return session.submit(ballot.ranking)
            except SessionNotRunning as exc:
                raise HTTPException(409, f"session is {exc.args[0]}, not running") from None
            except InvalidRankingError as exc:
                raise HTTPException(422, str(exc)) from None

    @app.post("/sessions/{session_id}/undo")
    def undo_last(session_id: str):
        session = _get(session_id)
        with session.lock:
            try:
                return session.undo()
            except NothingToUndo:
                raise HTTPException(409, "nothing to undo") from None

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with registry_lock:
            if session_id not in sessions:
                raise HTTPException(404, f"no session {session_id!r}")
            del sessions[session_id]
        return None

    return app
