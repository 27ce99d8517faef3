"""Choosers, temperature scaling, and the constrained generation loop.

Generation drives a derivation session from the front: at every step the
engine computes the distinct frontier moves (remaining terminal text, a
character class, or end-of-output when the prefix is already a member),
commits forced moves outright, and consults a chooser only when more than
one continuation is genuinely open. Committing feeds the session character
by character, so the output is a member of the language by construction.

Accounting mirrors an autoregressive sampler: sampler_calls counts consults
that committed at least one character, forced_moves counts auto-commits.
The final stop decision commits nothing and is counted in neither. With the
forced-move shortcut disabled the loop takes the same trajectory but bills
one call per character, which pins the disabled ratio at exactly 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence as TSequence, Union

import numpy as np

from .charset import CharSet, WHITESPACE
from .errors import (
    BackendError,
    BadAnswerError,
    BudgetExhaustedError,
    DepthExhaustedError,
    KernelInvariantError,
)
from .flatten import BranchRequest, CountRequest, ScalarRequest
from .session import Session, _K, _significant_expected
from .symbols import Grammar

_WS = frozenset(" \t\n\r")


@dataclass(frozen=True)
class DecayPolicy:
    """Recursion damping for random generation.

    Branch weights are multiplied by gamma once per enclosing frame the
    branch would re-enter, and at depth cap only non-recursive branches stay
    eligible. gamma < 1 makes unbounded recursion vanishing unlikely, which
    is what guarantees termination of random sampling.
    """

    gamma: float = 0.5
    depth: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if self.depth < 1:
            raise ValueError("depth cap must be >= 1")


@dataclass
class SamplerStats:
    chars_emitted: int = 0
    sampler_calls: int = 0
    forced_moves: int = 0


def sampler_call_ratio(stats: SamplerStats) -> float:
    """Chooser consults per emitted character."""
    if stats.chars_emitted <= 0:
        raise ValueError("ratio undefined for zero-length output")
    return stats.sampler_calls / stats.chars_emitted


@dataclass(frozen=True)
class GenerationResult:
    text: str
    stats: SamplerStats


# -- temperature ----------------------------------------------------------


def temperature_scale(logits, t: float) -> np.ndarray:
    """Probabilities proportional to exp(z / T); T = 0 is one-hot argmax.

    -inf entries are accepted as hard-mask sentinels and map to exactly
    zero probability; NaN and +inf are rejected.
    """
    z = np.asarray(logits, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("logits must be a nonempty 1-d vector")
    if np.isnan(z).any() or np.isposinf(z).any():
        raise ValueError("logits must not contain NaN or +inf")
    if np.isneginf(z).all():
        raise ValueError("all logits are masked out")
    if t < 0:
        raise ValueError("temperature must be >= 0")
    if t == 0:
        out = np.zeros_like(z)
        out[int(np.argmax(z))] = 1.0
        return out
    scaled = np.where(np.isneginf(z), -np.inf, z / t)
    shifted = scaled - np.max(scaled)
    e = np.exp(shifted)
    return e / e.sum()


# -- frontier moves -------------------------------------------------------


@dataclass(frozen=True)
class MoveOption:
    """One committable continuation at the current frontier."""

    index: int
    kind: str                      # "text" | "class" | "eos"
    text: Optional[str]
    chars: Optional[CharSet]
    weight: float                  # normalized probability share


@dataclass(frozen=True)
class MoveRequest:
    """Pick one frontier move by zero-based index."""

    options: tuple[MoveOption, ...]
    position: int
    accepting: bool


Request = Union[BranchRequest, ScalarRequest, CountRequest, MoveRequest]
Chooser = Callable[[Request], object]


# -- choosers -------------------------------------------------------------


class RandomChooser:
    """Seeded random answers with decayed recursion weighting."""

    def __init__(self, seed: int, policy: Optional[DecayPolicy] = None) -> None:
        self.policy = policy or DecayPolicy()
        self.rng = np.random.default_rng(seed)

    def __call__(self, request: Request) -> object:
        if isinstance(request, MoveRequest):
            return self._pick_move(request)
        if isinstance(request, BranchRequest):
            return self._pick_branch(request)
        if isinstance(request, ScalarRequest):
            return self._pick_scalar(request.chars)
        if isinstance(request, CountRequest):
            return int(self.rng.integers(request.lo, request.hi + 1))
        raise BadAnswerError(f"unsupported request {request!r}")

    def _pick_move(self, request: MoveRequest) -> int:
        if len(request.options) == 1:
            return 0
        weights = [option.weight for option in request.options]
        return self._weighted_index(weights)

    def _pick_branch(self, request: BranchRequest) -> int:
        policy = self.policy
        options = request.options
        if len(request.frames) >= policy.depth:
            eligible = [o for o in options if not o.recursive]
            if not eligible:
                names = sorted({n for o in options for n in o.refs})
                raise DepthExhaustedError(tuple(names))
        else:
            eligible = list(options)
        weights = []
        for option in eligible:
            k = sum(1 for frame in request.frames if frame in option.refs)
            weights.append(policy.gamma ** k)
        return eligible[self._weighted_index(weights)].index

    def _pick_scalar(self, chars: CharSet) -> str:
        if len(chars) == 1:
            return chr(chars.nth(0))
        return chr(chars.nth(int(self.rng.integers(0, len(chars)))))

    def _weighted_index(self, weights: list) -> int:
        total = sum(weights)
        draw = self.rng.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if draw < acc:
                return i
        return len(weights) - 1


class AdversarialChooser:
    """Deterministically tries to close early: ')' first, then ending.

    Useful for demonstrating that the engine never offers an illegal
    continuation: even a hostile policy produces members.
    """

    def __call__(self, request: Request) -> object:
        if isinstance(request, MoveRequest):
            for option in request.options:
                if option.kind == "text" and option.text.startswith(")"):
                    return option.index
                if option.kind == "class" and ord(")") in option.chars:
                    return option.index
            for option in request.options:
                if option.kind == "eos":
                    return option.index
            return 0
        if isinstance(request, ScalarRequest):
            if ord(")") in request.chars:
                return ")"
            return chr(request.chars.nth(0))
        if isinstance(request, BranchRequest):
            for option in request.options:
                if ord(")") in option.first:
                    return option.index
            for option in request.options:
                if option.nullable:
                    return option.index
            return 0
        if isinstance(request, CountRequest):
            return request.lo
        raise BadAnswerError(f"unsupported request {request!r}")


class ScriptedChooser:
    """Replays a fixed answer sequence; raises when the script runs dry."""

    def __init__(self, answers: TSequence[object]) -> None:
        self.answers = list(answers)
        self.cursor = 0

    def __call__(self, request: Request) -> object:
        if self.cursor >= len(self.answers):
            raise BadAnswerError("scripted answers exhausted")
        answer = self.answers[self.cursor]
        self.cursor += 1
        return answer


# -- constrained generation ----------------------------------------------


def constrained_generate(
    grammar: Grammar,
    chooser: Chooser,
    budget: int,
    *,
    shortcut: bool = True,
    verify: bool = True,
    policy: Optional[DecayPolicy] = None,
    thread_cap: int = 64,
) -> GenerationResult:
    """Generate one member of the grammar's language.

    The chooser sees MoveRequest consults (plus a ScalarRequest when the
    chosen or sole move is a character class); forced moves are committed
    silently. Optional whitespace is skipped rather than sampled. Budget
    exhaustion raises BudgetExhaustedError carrying the valid prefix.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    policy = policy or DecayPolicy()
    session = Session.start(
        grammar,
        thread_cap=thread_cap,
        depth_cap=policy.depth,
        gamma=policy.gamma,
    )
    stats = SamplerStats()
    out: list[str] = []

    while True:
        moves = _live_moves(session)
        if not moves:
            # every thread fell to the depth backstop; nothing else can
            # empty a live frontier
            raise DepthExhaustedError(tuple(sorted(session._recursive)))
        if len(moves) == 1:
            kind, payload, _logw, _members = moves[0]
            if kind == _K.MOVE_EOS:
                break
            if kind == _K.MOVE_TEXT:
                _commit_text(session, payload, out, stats, budget, consulted=False,
                             shortcut=shortcut)
                continue
            if len(payload) == 1:
                _commit_char(session, chr(payload.nth(0)), out, stats, budget,
                             consulted=False, shortcut=shortcut)
                continue
            answer = chooser(ScalarRequest(payload, _frame_names(session)))
            _check_scalar(answer, payload)
            _commit_char(session, answer, out, stats, budget, consulted=True,
                         shortcut=shortcut)
            continue

        request = _move_request(moves, session)
        answer = chooser(request)
        if not (isinstance(answer, int) and 0 <= answer < len(moves)):
            raise BadAnswerError(
                f"move answer {answer!r} is outside 0..{len(moves) - 1}"
            )
        kind, payload, _logw, _members = moves[answer]
        if kind == _K.MOVE_EOS:
            break
        if kind == _K.MOVE_TEXT:
            _commit_text(session, payload, out, stats, budget, consulted=True,
                         shortcut=shortcut)
        else:
            if len(payload) == 1:
                scalar = chr(payload.nth(0))
            else:
                scalar = chooser(ScalarRequest(payload, _frame_names(session)))
                _check_scalar(scalar, payload)
            _commit_char(session, scalar, out, stats, budget, consulted=True,
                         shortcut=shortcut)

    text = "".join(out)
    if verify:
        from .session import is_member

        if not is_member(grammar, text, thread_cap=thread_cap):
            raise KernelInvariantError(
                f"generated text failed re-validation: {text!r}"
            )
    return GenerationResult(text, stats)


def _live_moves(session: Session) -> list:
    """Frontier moves with optional-whitespace paths folded away.

    A move is blank when every character it would emit is whitespace. Blank
    moves are dropped when significant alternatives exist at the same
    consult, or when nothing significant can ever follow them (trailing
    whitespace before end). Mandatory whitespace — indentation with content
    beyond it and no alternative — survives. If dropping would leave no
    move at a non-accepting point, the original set stands.
    """
    moves = _K.frontier_moves(session.threads, session.accepting)
    blanks = []
    solids = []
    has_eos = False
    for move in moves:
        kind, payload = move[0], move[1]
        if kind == _K.MOVE_EOS:
            has_eos = True
            solids.append(move)
        elif kind == _K.MOVE_TEXT:
            (blanks if all(c in _WS for c in payload) else solids).append(move)
        else:
            (blanks if not (payload - WHITESPACE) else solids).append(move)
    if not blanks:
        return moves
    if any(m[0] != _K.MOVE_EOS for m in solids):
        return solids
    members = [t for m in blanks for t in m[3]]
    if _blanks_lead_somewhere(session, members):
        kept = solids + blanks
    else:
        kept = solids
    if any(m[0] != _K.MOVE_EOS for m in kept) or (has_eos and kept):
        return kept
    if has_eos:
        return [m for m in moves if m[0] == _K.MOVE_EOS]
    return moves


_CLOSURE_CACHE: Optional["weakref.WeakKeyDictionary"] = None


def _blanks_lead_somewhere(session: Session, members: list) -> bool:
    """Whether any significant character is reachable through the blank
    moves' threads. Cached per grammar on the threads' continuation shape:
    a generation run revisits the same handful of end-of-document states."""
    global _CLOSURE_CACHE
    if _CLOSURE_CACHE is None:
        import weakref

        _CLOSURE_CACHE = weakref.WeakKeyDictionary()
    from .session import _stack_key

    per_grammar = _CLOSURE_CACHE.get(session.grammar)
    if per_grammar is None:
        per_grammar = _CLOSURE_CACHE[session.grammar] = {}
    key = frozenset(_stack_key(thread[0]) for thread in members)
    hit = per_grammar.get(key)
    if hit is None:
        hit = bool(
            _significant_expected(
                members, session.position, session.thread_cap,
                session._recursive,
            )
        )
        per_grammar[key] = hit
    return hit


def _move_request(moves: list, session: Session) -> MoveRequest:
    logws = [m[2] for m in moves]
    m = max(logws)
    shares = [math.exp(v - m) for v in logws]
    total = sum(shares)
    options = []
    for index, move in enumerate(moves):
        kind, payload = move[0], move[1]
        options.append(
            MoveOption(
                index=index,
                kind={_K.MOVE_TEXT: "text", _K.MOVE_CLASS: "class",
                      _K.MOVE_EOS: "eos"}[kind],
                text=payload if kind == _K.MOVE_TEXT else None,
                chars=payload if kind == _K.MOVE_CLASS else None,
                weight=shares[index] / total,
            )
        )
    return MoveRequest(
        options=tuple(options),
        position=session.position,
        accepting=session.accepting,
    )


def _commit_text(session, payload, out, stats, budget, *, consulted, shortcut):
    emitted = 0
    for ch in payload:
        if stats.chars_emitted >= budget:
            _bill(stats, emitted, consulted, shortcut)
            raise BudgetExhaustedError("".join(out), budget)
        _feed_checked(session, ch)
        out.append(ch)
        stats.chars_emitted += 1
        emitted += 1
    _bill(stats, emitted, consulted, shortcut)


def _commit_char(session, ch, out, stats, budget, *, consulted, shortcut):
    if stats.chars_emitted >= budget:
        raise BudgetExhaustedError("".join(out), budget)
    _feed_checked(session, ch)
    out.append(ch)
    stats.chars_emitted += 1
    _bill(stats, 1, consulted, shortcut)


def _bill(stats, emitted, consulted, shortcut):
    # a consult pays for its first character; the tail of a multi-character
    # text move is forced either way
    if emitted == 0:
        return
    if not shortcut:
        stats.sampler_calls += emitted
    elif consulted:
        stats.sampler_calls += 1
        stats.forced_moves += emitted - 1
    else:
        stats.forced_moves += emitted


def _feed_checked(session, ch):
    from .session import Error

    result = session.feed(ch)
    if isinstance(result, Error):
        raise KernelInvariantError(
            f"frontier move rejected its own character {ch!r} "
            f"at position {result.position}"
        )


def _frame_names(session: Session) -> tuple:
    return tuple(name for name, _entry in session.frames())


def _check_scalar(answer, chars: CharSet) -> None:
    if not (isinstance(answer, str) and len(answer) == 1
            and ord(answer) in chars):
        raise BadAnswerError(
            f"scalar answer {answer!r} is not in {chars.preview()}"
        )


def generate_corpus(
    grammar: Grammar,
    count: int,
    seed: int,
    budget: int,
    *,
    shortcut: bool = True,
    policy: Optional[DecayPolicy] = None,
) -> list[GenerationResult]:
    """Sequential corpus from one seeded chooser; item i is reproducible
    by generating i+1 items from the same seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    chooser = RandomChooser(seed, policy)
    return [
        constrained_generate(
            grammar, chooser, budget, shortcut=shortcut, policy=policy
        )
        for _ in range(count)
    ]


# -- backends -------------------------------------------------------------


def mock_backend(
    kind: str,
    vocab_size: int,
    *,
    token_text: Optional[TSequence[str]] = None,
    kappa: float = 0.3,
    mu: float = 2.0,
    table: Optional[TSequence[TSequence[float]]] = None,
) -> Callable[[str], np.ndarray]:
    """Stand-in logits backends: uniform, biased-closer, scripted.

    biased-closer scores ')' higher the more bracket characters the context
    already holds (diff = kappa * count - mu, split +-diff/2 between the
    closing and opening characters of each token), reproducing the
    lose-count-over-length failure mode of unconstrained models.
    """
    if kind == "uniform":
        def uniform(context: str) -> np.ndarray:
            return np.zeros(vocab_size)

        return uniform
    if kind == "biased-closer":
        if token_text is None:
            raise ValueError("biased-closer needs token_text")
        if len(token_text) != vocab_size:
            raise ValueError("token_text length must equal vocab_size")

        def biased(context: str) -> np.ndarray:
            count = sum(1 for c in context if c in "()")
            diff = kappa * count - mu
            z = np.zeros(vocab_size)
            for tid, text in enumerate(token_text):
                if text is None:
                    continue
                score = 0.0
                for c in text:
                    if c == ")":
                        score += diff / 2.0
                    elif c == "(":
                        score -= diff / 2.0
                z[tid] = score
            return z

        return biased
    if kind == "scripted":
        if table is None:
            raise ValueError("scripted needs a table")
        rows = [np.asarray(row, dtype=float) for row in table]
        for row in rows:
            if row.shape != (vocab_size,):
                raise ValueError("scripted rows must match vocab_size")
        cursor = [0]

        def scripted(context: str) -> np.ndarray:
            if cursor[0] >= len(rows):
                raise BackendError("scripted logits table exhausted")
            row = rows[cursor[0]]
            cursor[0] += 1
            return row

        return scripted
    raise ValueError(f"unknown mock backend kind {kind!r}")


def remote_backend(url: str, vocab_id: str) -> Callable[[str], np.ndarray]:
    """Logits from a remote model speaking the documented wire protocol:
    POST {context, vocab_id} -> {logits: [...]}."""
    import httpx

    def call(context: str) -> np.ndarray:
        try:
            response = httpx.post(
                url, json={"context": context, "vocab_id": vocab_id}, timeout=30.0
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as err:
            raise BackendError(f"remote backend failed: {err}") from err
        logits = payload.get("logits")
        if not isinstance(logits, list):
            raise BackendError("remote backend returned no logits array")
        return np.asarray(logits, dtype=float)

    return call
