"""HTTP API over derivation sessions, generation, validation, and masks.

The playground drives this API exclusively; nothing grammar-aware runs in
the browser. Sessions live in memory, expire after an idle timeout, and
are serialized by the single-threaded event loop (one uvicorn worker), so
per-session ordering holds without extra locking.

Status codes: 404 unknown or expired session, 409 session dead (or an
operation illegal in the current state), 400 malformed body, 422 unknown
grammar. Expected sets travel as arrays of {"lo": scalar, "hi": scalar}.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .charset import CharSet
from .errors import (
    BudgetExhaustedError,
    DeadSessionError,
    DepthExhaustedError,
    EngineError,
    ThreadCapError,
)
from .grammars import builtin_names, load_builtin
from .session import Eof, Error, Session
from .symbols import GrammarError

DEFAULT_IDLE_TIMEOUT = 600.0
_DEMO_TOKENS = [
    "{", "}", "[", "]", ":", ",", '"', "true", "false", "null",
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
    "a", "b", "e", "x", ".", "-", " ",
]


@dataclass
class _Entry:
    session: Session
    grammar_name: str
    rng: np.random.Generator
    created: float = field(default_factory=time.monotonic)
    last_access: float = field(default_factory=time.monotonic)


class _HttpError(Exception):
    def __init__(self, status: int, detail: str) -> None:
        self.status = status
        self.detail = detail
        super().__init__(detail)


def create_app(*, idle_timeout: float = DEFAULT_IDLE_TIMEOUT) -> FastAPI:
    app = FastAPI(title="cfgen", docs_url=None, redoc_url=None)
    table: dict[str, _Entry] = {}

    @app.exception_handler(_HttpError)
    async def _http_error(request: Request, err: _HttpError):
        return JSONResponse({"detail": err.detail}, status_code=err.status)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, err):
        return JSONResponse({"detail": "malformed request"}, status_code=400)

    def lookup(session_id: str) -> _Entry:
        entry = table.get(session_id)
        if entry is not None and (
            time.monotonic() - entry.last_access > idle_timeout
        ):
            del table[session_id]
            entry = None
        if entry is None:
            raise _HttpError(404, f"unknown or expired session {session_id}")
        entry.last_access = time.monotonic()
        return entry

    def sweep() -> None:
        now = time.monotonic()
        stale = [sid for sid, e in table.items()
                 if now - e.last_access > idle_timeout]
        for sid in stale:
            del table[sid]

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await _body(request)
        name = body.get("grammar")
        if not isinstance(name, str):
            raise _HttpError(400, "body must carry a grammar name")
        seed = body.get("seed", 0)
        if not isinstance(seed, int):
            raise _HttpError(400, "seed must be an integer")
        grammar = _load(name)
        sweep()
        session = Session.start(grammar, gamma=0.5, depth_cap=64)
        session_id = uuid.uuid4().hex
        table[session_id] = _Entry(
            session, name, np.random.default_rng(seed)
        )
        return {"session_id": session_id, "grammar": name}

    @app.post("/sessions/{session_id}/feed")
    async def feed(session_id: str, request: Request):
        entry = lookup(session_id)
        body = await _body(request)
        if "step" in body:
            return _step(entry, body["step"])
        text = body.get("text")
        if not isinstance(text, str):
            raise _HttpError(400, "body must carry text or step")
        if body.get("atomic", False):
            return _feed_atomic(entry, text)
        return _feed_plain(entry.session, text)

    @app.get("/sessions/{session_id}/expected")
    async def expected(session_id: str, significant: bool = False):
        entry = lookup(session_id)
        session = entry.session
        if session.dead:
            raise _HttpError(409, "session is dead")
        chars = session.expected_next(significant_only=significant)
        return {
            "expected": _ranges(chars),
            "accepting": session.accepting,
            "position": session.position,
            "text": session.text,
        }

    @app.post("/sessions/{session_id}/clone")
    async def clone(session_id: str):
        entry = lookup(session_id)
        twin = entry.session.clone()
        twin_id = uuid.uuid4().hex
        table[twin_id] = _Entry(
            twin, entry.grammar_name, np.random.default_rng(0)
        )
        return {"session_id": twin_id, "grammar": entry.grammar_name}

    @app.delete("/sessions/{session_id}")
    async def close(session_id: str):
        entry = table.pop(session_id, None)
        if entry is None:
            raise _HttpError(404, f"unknown or expired session {session_id}")
        return {"closed": True}

    @app.post("/generate")
    async def generate(request: Request):
        body = await _body(request)
        return _generate(body)

    @app.post("/validate")
    async def validate(request: Request):
        body = await _body(request)
        name = body.get("grammar")
        text = body.get("text")
        if not isinstance(name, str) or not isinstance(text, str):
            raise _HttpError(400, "body must carry grammar and text")
        grammar = _load(name)
        significant = bool(body.get("significant", False))
        return _validate(grammar, text, significant)

    @app.post("/token-mask")
    async def mask_endpoint(request: Request):
        from .tokens import make_vocab, token_mask

        body = await _body(request)
        name = body.get("grammar")
        tokens = body.get("tokens")
        text = body.get("text", "")
        if not isinstance(name, str) or not isinstance(tokens, list) \
                or not isinstance(text, str):
            raise _HttpError(400, "body must carry grammar, tokens, text")
        grammar = _load(name)
        try:
            vocab = make_vocab(tokens)
        except EngineError as err:
            raise _HttpError(400, str(err))
        session = Session.start(grammar)
        for ch in text:
            if isinstance(session.feed(ch), Error):
                raise _HttpError(409, "text is not a valid prefix")
        mask = token_mask(session, vocab)
        return {
            "mask": [bool(b) for b in mask],
            "allowed": [int(i) for i in mask.nonzero()[0]],
            "eos_id": vocab.eos_id,
        }

    @app.get("/grammars")
    async def grammars():
        return {"grammars": builtin_names()}

    return app


# -- handlers -------------------------------------------------------------


async def _body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise _HttpError(400, "body is not valid JSON")
    if not isinstance(body, dict):
        raise _HttpError(400, "body must be a JSON object")
    return body


def _load(name: str):
    try:
        return load_builtin(name)
    except GrammarError as err:
        raise _HttpError(422, str(err))


def _ranges(chars: CharSet) -> list:
    return [{"lo": chr(lo), "hi": chr(hi)} for lo, hi in chars.ranges]


def _instruction(session: Session, status: str, emitted: str = "") -> dict:
    return {
        "status": status,
        "expected": _ranges(session.expected_next()) if not session.dead
        else [],
        "accepting": session.accepting,
        "position": session.position,
        "frames": [name for name, _ in session.frames()],
        "emitted": emitted,
        "text": session.text,
    }


def _rejection(session: Session, error: Error) -> dict:
    return {
        "status": "rejected",
        "expected": _ranges(error.expected),
        "accepting": False,
        "position": error.position,
        "found": error.found,
        "end_allowed": error.end_allowed,
        "frames": [name for name, _ in error.frames],
        "emitted": "",
        "text": session.text,
    }


def _feed_plain(session: Session, text: str) -> dict:
    if session.dead:
        raise _HttpError(409, "session is dead")
    for ch in text:
        result = session.feed(ch)
        if isinstance(result, Error):
            return _rejection(session, result)
    if isinstance(session.peek(), Eof):
        return _instruction(session, "eof")
    return _instruction(session, "accepted")


def _feed_atomic(entry: _Entry, text: str) -> dict:
    session = entry.session
    if session.dead:
        raise _HttpError(409, "session is dead")
    probe = session.clone()
    for ch in text:
        result = probe.feed(ch)
        if isinstance(result, Error):
            # nothing committed; the original session stays live
            return _rejection(session, result)
    entry.session = probe
    if isinstance(probe.peek(), Eof):
        return _instruction(probe, "eof")
    return _instruction(probe, "accepted")


def _step(entry: _Entry, step) -> dict:
    from .sampling import _live_moves
    from .session import _K

    session = entry.session
    if session.dead:
        raise _HttpError(409, "session is dead")
    if step not in ("sample", "empty", "stop"):
        raise _HttpError(400, f"unknown step {step!r}")
    if step == "stop":
        if not session.accepting:
            raise _HttpError(409, "cannot stop: the text is not a member yet")
        return _instruction(session, "eof")
    try:
        moves = _live_moves(session)
    except DepthExhaustedError as err:
        raise _HttpError(409, str(err))
    if not moves:
        raise _HttpError(409, "no continuation available")
    if step == "empty":
        eos = [m for m in moves if m[0] == _K.MOVE_EOS]
        if eos:
            return _instruction(session, "eof")
        move = max(moves, key=lambda m: m[2])
    else:
        logws = np.array([m[2] for m in moves])
        probs = np.exp(logws - logws.max())
        probs /= probs.sum()
        move = moves[int(entry.rng.choice(len(moves), p=probs))]
    kind, payload = move[0], move[1]
    if kind == _K.MOVE_EOS:
        return _instruction(session, "eof")
    if kind == _K.MOVE_TEXT:
        emitted = payload
    elif step == "empty":
        emitted = chr(payload.nth(0))
    else:
        emitted = chr(payload.nth(int(entry.rng.integers(0, len(payload)))))
    for ch in emitted:
        result = session.feed(ch)
        if isinstance(result, Error):
            raise _HttpError(500, "engine offered an infeasible move")
    status = "eof" if isinstance(session.peek(), Eof) else "accepted"
    return _instruction(session, status, emitted)


def _generate(body: dict) -> dict:
    from .sampling import generate_corpus

    response_format = body.get("response_format")
    if response_format is not None:
        if (
            not isinstance(response_format, dict)
            or response_format.get("type") != "json_object"
        ):
            raise _HttpError(400, "unsupported response_format")
        name = "json"
    else:
        name = body.get("grammar", "json")
        if not isinstance(name, str):
            raise _HttpError(400, "grammar must be a name")
    seed = body.get("seed", 0)
    count = body.get("count", 1)
    budget = body.get("budget", 4000)
    for label, value in (("seed", seed), ("count", count), ("budget", budget)):
        if not isinstance(value, int):
            raise _HttpError(400, f"{label} must be an integer")
    if count < 1 or budget < 1:
        raise _HttpError(400, "count and budget must be >= 1")
    if body.get("unconstrained", False):
        return _generate_unconstrained(seed, body.get("max_tokens", 64))
    grammar = _load(name)
    try:
        results = generate_corpus(grammar, count, seed, budget)
    except BudgetExhaustedError as err:
        raise _HttpError(409, f"budget exhausted; valid prefix {err.prefix!r}")
    except ThreadCapError as err:
        raise _HttpError(409, str(err))
    return {
        "outputs": [r.text for r in results],
        "stats": [
            {
                "chars_emitted": r.stats.chars_emitted,
                "sampler_calls": r.stats.sampler_calls,
                "forced_moves": r.stats.forced_moves,
            }
            for r in results
        ],
    }


def _generate_unconstrained(seed: int, max_tokens) -> dict:
    """Free-running decode against the demo backend: no grammar mask, so
    the output is whatever the backend happens to emit."""
    if not isinstance(max_tokens, int) or max_tokens < 1:
        raise _HttpError(400, "max_tokens must be a positive integer")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tokens):
        token = _DEMO_TOKENS[int(rng.integers(0, len(_DEMO_TOKENS)))]
        out.append(token)
        if rng.random() < 0.08:
            break
    return {"outputs": ["".join(out)], "stats": [], "constrained": False}


def _validate(grammar, text: str, significant: bool) -> dict:
    from .charset import WHITESPACE

    session = Session.start(grammar)
    for ch in text:
        result = session.feed(ch)
        if isinstance(result, Error):
            expected = result.expected
            if significant:
                expected = expected - WHITESPACE
            return {
                "verdict": "error",
                "position": result.position,
                "found": result.found,
                "expected": _ranges(expected),
                "end": result.end_allowed,
            }
    if session.accepting:
        return {"verdict": "member"}
    return {
        "verdict": "prefix",
        "expected": _ranges(
            session.expected_next(significant_only=significant)
        ),
        "end": False,
    }


app = create_app()
