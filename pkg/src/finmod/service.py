"""Session-based HTTP facade for playing the comparison games move by move.

A session holds two structures, a game kind (m-round element game or
s-pebble game with m moves), the side the human plays, and the current
position.  The winning-position tables are computed once at session
creation, so hints and engine replies are table lookups; sessions live
in memory only and expire after an idle timeout.

Endpoints::

    POST /sessions                {kind, m, s?, left, right, humanSide}
    GET  /sessions/{id}           current view
    POST /sessions/{id}/moves     {structure, element, pebble?}
    GET  /sessions/{id}/hint      {move, winning}

The view JSON is {pebbles: {left: [...], right: [...]}, history,
movesLeft, status, lastEngineMove, toMove}; pebble arrays use null for
an empty slot.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .games import (
    DUPLICATOR,
    SPOILER,
    EFTable,
    GameError,
    GamePosition,
    Move,
    WinSets,
    ef_table,
    is_s_partial_isomorphism,
    optimal_move,
    pebble_win_sets,
)
from .structures import Structure, StructureError, is_partial_isomorphism, structure_from_json


class SessionConfig(BaseModel):
    kind: str  # "ef" or "pebble"
    m: int
    s: Optional[int] = None
    left: dict
    right: dict
    humanSide: str  # "Spoiler" or "Duplicator"


class MoveRequest(BaseModel):
    structure: str  # "left" or "right"
    element: int
    pebble: Optional[int] = None


ONGOING, HUMAN_WON, ENGINE_WON = "ongoing", "humanWon", "engineWon"


@dataclass
class Session:
    id: str
    kind: str
    m: int
    s: int
    left: Structure
    right: Structure
    human_side: str
    table: Union[EFTable, WinSets]
    left_tuple: list[Optional[int]] = field(default_factory=list)
    right_tuple: list[Optional[int]] = field(default_factory=list)
    rounds_played: int = 0
    pending: Optional[Move] = None
    status: str = ONGOING
    history: list[dict] = field(default_factory=list)
    last_engine_move: Optional[dict] = None
    failure_reason: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    last_access: float = field(default_factory=time.monotonic)

    # -- position bookkeeping

    def moves_remaining(self) -> int:
        return self.m - self.rounds_played

    def side_to_move(self) -> str:
        return DUPLICATOR if self.pending is not None else SPOILER

    def position(self) -> GamePosition:
        return GamePosition(
            kind=self.kind,
            left_tuple=tuple(self.left_tuple),
            right_tuple=tuple(self.right_tuple),
            moves_remaining=self.moves_remaining(),
            side_to_move=self.side_to_move(),
            pending=self.pending,
        )

    def checkpoint_ok(self) -> bool:
        if self.kind == "pebble":
            return is_s_partial_isomorphism(
                self.left, tuple(self.left_tuple), self.right, tuple(self.right_tuple)
            )
        pairs = [
            (a, b)
            for a, b in zip(self.left_tuple, self.right_tuple)
            if a is not None and b is not None
        ]
        from .games import _constant_pairs

        return is_partial_isomorphism(
            self.left, self.right, pairs + _constant_pairs(self.left, self.right)
        )

    def apply_pick(self, move: Move) -> None:
        """A picking move by the side to move (always the picker role)."""
        self.pending = move

    def apply_reply(self, move: Move) -> None:
        pick = self.pending
        assert pick is not None
        slot = pick.pebble if self.kind == "pebble" else self.rounds_played
        if self.kind == "ef":
            while len(self.left_tuple) <= slot:
                self.left_tuple.append(None)
                self.right_tuple.append(None)
        if pick.side == "left":
            self.left_tuple[slot] = pick.element
            self.right_tuple[slot] = move.element
        else:
            self.right_tuple[slot] = pick.element
            self.left_tuple[slot] = move.element
        self.pending = None
        self.rounds_played += 1

    def finish_round(self) -> None:
        if not self.checkpoint_ok():
            self.failure_reason = self._diagnose()
            self._decide(SPOILER)
        elif self.rounds_played >= self.m:
            self._decide(DUPLICATOR)

    def _diagnose(self) -> str:
        from .structures import partial_isomorphism_failure
        from .games import _constant_pairs

        pairs = [
            (a, b)
            for a, b in zip(self.left_tuple, self.right_tuple)
            if a is not None and b is not None
        ]
        reason = partial_isomorphism_failure(
            self.left, self.right, pairs + _constant_pairs(self.left, self.right)
        )
        return reason or "pebbled tuples no longer match"

    def _decide(self, winner_role: str) -> None:
        self.status = HUMAN_WON if winner_role == self.human_side else ENGINE_WON

    # -- engine

    def engine_roles(self) -> str:
        return SPOILER if self.human_side == DUPLICATOR else DUPLICATOR

    def engine_act(self) -> None:
        """Let the engine move until it is the human's turn or the game ends."""
        while self.status == ONGOING and self.side_to_move() == self.engine_roles():
            move = optimal_move(self.position(), self.table)
            record = {
                "by": "engine",
                "structure": move.side,
                "element": move.element,
            }
            if self.kind == "pebble":
                record["pebble"] = move.pebble
            if self.side_to_move() == SPOILER:
                self.apply_pick(move)
            else:
                self.apply_reply(move)
                self.finish_round()
            self.history.append(record)
            self.last_engine_move = record

    def view(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "m": self.m,
            "s": self.s if self.kind == "pebble" else None,
            "humanSide": self.human_side,
            "pebbles": {"left": list(self.left_tuple), "right": list(self.right_tuple)},
            "history": list(self.history),
            "movesLeft": self.moves_remaining(),
            "status": self.status,
            "toMove": self.side_to_move() if self.status == ONGOING else None,
            "pending": (
                {
                    "structure": self.pending.side,
                    "element": self.pending.element,
                    "pebble": self.pending.pebble,
                }
                if self.pending
                else None
            ),
            "lastEngineMove": self.last_engine_move,
            "failureReason": self.failure_reason,
        }


def _new_session(config: SessionConfig, bound: int) -> Session:
    if config.kind not in ("ef", "pebble"):
        raise GameError(f"unknown game kind {config.kind!r}")
    if config.humanSide not in (SPOILER, DUPLICATOR):
        raise GameError("humanSide must be 'Spoiler' or 'Duplicator'")
    if config.m < 0:
        raise GameError("move count must be nonnegative")
    left = structure_from_json(config.left)
    right = structure_from_json(config.right)
    if config.kind == "pebble":
        s = config.s or 0
        if s < 1:
            raise GameError("pebble games need s >= 1")
        table: Union[EFTable, WinSets] = pebble_win_sets(left, right, s, config.m, bound)
        left_tuple: list[Optional[int]] = [None] * s
        right_tuple: list[Optional[int]] = [None] * s
    else:
        s = 0
        table = ef_table(left, (), right, (), config.m, bound)
        left_tuple, right_tuple = [], []
    session = Session(
        id=uuid.uuid4().hex,
        kind=config.kind,
        m=config.m,
        s=s,
        left=left,
        right=right,
        human_side=config.humanSide,
        table=table,
        left_tuple=left_tuple,
        right_tuple=right_tuple,
    )
    if config.m == 0:
        session._decide(DUPLICATOR if session.checkpoint_ok() else SPOILER)
    return session


def create_app(bound: int = 2_000_000, idle_timeout: float = 3600.0) -> FastAPI:
    app = FastAPI(title="finmod game arena")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def purge() -> None:
        now = time.monotonic()
        with registry_lock:
            stale = [sid for sid, s in sessions.items() if now - s.last_access > idle_timeout]
            for sid in stale:
                del sessions[sid]

    def get_session(session_id: str) -> Session:
        purge()
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        session.last_access = time.monotonic()
        return session

    @app.post("/sessions")
    def create_session(config: SessionConfig) -> dict:
        purge()
        try:
            session = _new_session(config, bound)
        except (GameError, StructureError, ValueError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        with session.lock:
            session.engine_act()
            view = session.view()
        with registry_lock:
            sessions[session.id] = session
        return {"id": session.id, "view": view}

    @app.get("/sessions/{session_id}")
    def get_view(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return session.view()

    @app.post("/sessions/{session_id}/moves")
    def play_move(session_id: str, move: MoveRequest) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.status != ONGOING:
                raise HTTPException(status_code=409, detail="the game is already over")
            if move.structure not in ("left", "right"):
                raise HTTPException(status_code=400, detail="structure must be 'left' or 'right'")
            if session.side_to_move() != session.human_side:
                raise HTTPException(status_code=400, detail="it is the engine's turn")
            target = session.left if move.structure == "left" else session.right
            if not 0 <= move.element < target.size:
                raise HTTPException(
                    status_code=400,
                    detail=f"element {move.element} out of range for the {move.structure} structure",
                )
            if session.kind == "pebble":
                if move.pebble is None or not 0 <= move.pebble < session.s:
                    raise HTTPException(status_code=400, detail="bad pebble index")
            if session.human_side == SPOILER:
                human_move = Move(move.structure, move.element, move.pebble)
                session.apply_pick(human_move)
            else:
                pick = session.pending
                if pick is None:
                    raise HTTPException(status_code=400, detail="no pick to reply to")
                expected = "right" if pick.side == "left" else "left"
                if move.structure != expected:
                    raise HTTPException(
                        status_code=400,
                        detail=f"the reply must be in the {expected} structure",
                    )
                if session.kind == "pebble" and move.pebble != pick.pebble:
                    raise HTTPException(
                        status_code=400, detail="the reply must use the picked pebble"
                    )
                session.apply_reply(Move(move.structure, move.element, move.pebble))
                session.finish_round()
            session.history.append(
                {
                    "by": "human",
                    "structure": move.structure,
                    "element": move.element,
                    **({"pebble": move.pebble} if session.kind == "pebble" else {}),
                }
            )
            session.engine_act()
            return session.view()

    @app.get("/sessions/{session_id}/hint")
    def hint(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.status != ONGOING:
                raise HTTPException(status_code=409, detail="the game is already over")
            if session.side_to_move() != session.human_side:
                raise HTTPException(status_code=400, detail="it is the engine's turn")
            move = optimal_move(session.position(), session.table)
            return {
                "move": {
                    "structure": move.side,
                    "element": move.element,
                    "pebble": move.pebble,
                },
                "winning": not move.losing,
            }

    return app


app = create_app()
