"""Incremental derivation sessions: feed one character, learn what fits next.

A session keeps every speculative parse of the consumed prefix alive as a set
of kernel threads. Feeding a character advances the matching threads and
discards the rest; the session can always report the exact set of acceptable
next characters, whether the prefix is already a complete member, and the
active rule stack. Sessions are cheap to clone, which is what makes
lookahead-style verification (try a token, keep the clone on failure)
practical.
"""

from __future__ import annotations

import importlib.util
import math
import os
import sys
from dataclasses import dataclass

from .analysis import productive_rules
from .charset import CharSet, EMPTY_SET
from .errors import DeadSessionError
from .symbols import Grammar, GrammarError

DEFAULT_THREAD_CAP = 64

_MERGE_THRESHOLD = 16
_WS_CODES = frozenset((0x20, 0x09, 0x0A, 0x0D))
_WS_CHARS = tuple(chr(c) for c in sorted(_WS_CODES))
_WS_SET = CharSet([(c, c) for c in _WS_CHARS])
_SIGNIFICANT_ROUNDS = 64


def _load_kernel():
    if os.environ.get("CFGEN_PURE_KERNEL") == "1":
        return _load_pure_kernel()
    from . import _kernel
    return _kernel


def _load_pure_kernel():
    """Import the plain-Python kernel source even when the compiled
    extension shadows it."""
    name = "cfgen._kernel_pure"
    mod = sys.modules.get(name)
    if mod is not None:
        return mod
    path = os.path.join(os.path.dirname(__file__), "_kernel.py")
    spec = importlib.util.spec_from_file_location(name, path)
    mod = importlib.util.module_from_spec(spec)
    sys.modules[name] = mod
    spec.loader.exec_module(mod)
    return mod


_K = _load_kernel()


def kernel_backend() -> str:
    """'compiled' or 'pure', depending on which kernel import won."""
    return _K.kernel_backend()


@dataclass(frozen=True)
class Expect:
    """The prefix is viable; here is what may come next."""

    expected: CharSet
    accepting: bool
    position: int
    frames: tuple


@dataclass(frozen=True)
class Error:
    """The last character was rejected; the session is dead.

    end_allowed records whether stopping was legal where the rejection
    happened, so reports can say "expected X or end"."""

    position: int
    found: str
    expected: CharSet
    frames: tuple
    end_allowed: bool = False


@dataclass(frozen=True)
class Eof:
    """The prefix is a complete member and nothing can extend it."""

    position: int


@dataclass
class SessionStats:
    chars: int = 0
    feed_attempts: int = 0
    expand_steps: int = 0


class Session:
    """One incremental derivation over a grammar."""

    __slots__ = (
        "grammar",
        "threads",
        "consumed",
        "position",
        "dead",
        "thread_cap",
        "depth_cap",
        "gamma",
        "stats",
        "_recursive",
        "_last_error",
    )

    def __init__(
        self,
        grammar: Grammar,
        threads: list,
        *,
        thread_cap: int,
        depth_cap=None,
        gamma=None,
        recursive: frozenset = frozenset(),
    ):
        self.grammar = grammar
        self.threads = threads
        self.consumed: list[str] = []
        self.position = 0
        self.dead = False
        self.thread_cap = thread_cap
        self.depth_cap = depth_cap
        self.gamma = gamma
        self.stats = SessionStats()
        self._recursive = recursive
        self._last_error: Error | None = None

    # -- construction -------------------------------------------------

    @classmethod
    def start(
        cls,
        grammar: Grammar,
        *,
        thread_cap: int = DEFAULT_THREAD_CAP,
        depth_cap=None,
        gamma=None,
    ) -> "Session":
        productive = productive_rules(grammar)
        if grammar.start.name not in productive:
            raise GrammarError(
                f"rule '{grammar.start.name}' cannot derive any finite string"
            )
        recursive = _recursive_names(grammar)
        session = cls(
            grammar,
            _K.seed_threads(grammar.start),
            thread_cap=thread_cap,
            depth_cap=depth_cap,
            gamma=gamma,
            recursive=recursive,
        )
        session._normalize()
        return session

    def clone(self) -> "Session":
        """Independent copy sharing immutable thread structure."""
        twin = Session(
            self.grammar,
            list(self.threads),
            thread_cap=self.thread_cap,
            depth_cap=self.depth_cap,
            gamma=self.gamma,
            recursive=self._recursive,
        )
        twin.consumed = list(self.consumed)
        twin.position = self.position
        twin.dead = self.dead
        twin._last_error = self._last_error
        twin.stats = SessionStats(
            self.stats.chars, self.stats.feed_attempts, self.stats.expand_steps
        )
        return twin

    # -- stepping ------------------------------------------------------

    def feed(self, ch: str):
        """Consume one character; returns Expect, Error, or Eof."""
        if self.dead:
            raise DeadSessionError(
                f"session rejected input at position {self._last_error.position}"
                if self._last_error
                else "session is closed"
            )
        if len(ch) != 1:
            raise ValueError("feed() takes exactly one character")
        before = self.threads
        advanced, attempts = _K.feed_threads(self.threads, ch)
        self.stats.feed_attempts += attempts
        self.stats.chars += 1
        if advanced is None:
            error = Error(
                position=self.position + 1,
                found=ch,
                expected=_K.union_expected(before),
                frames=self._frames(before),
                end_allowed=_K.any_complete(before),
            )
            self.dead = True
            self._last_error = error
            return error
        self.threads = advanced
        self.position += 1
        self.consumed.append(ch)
        self._normalize()
        expected = _K.union_expected(self.threads)
        accepting = _K.any_complete(self.threads)
        if not expected and accepting:
            return Eof(position=self.position)
        return Expect(
            expected=expected,
            accepting=accepting,
            position=self.position,
            frames=self._frames(self.threads),
        )

    def feed_text(self, text: str):
        """Feed a whole string; returns the last instruction."""
        last = self.peek()
        for ch in text:
            last = self.feed(ch)
            if isinstance(last, Error):
                return last
        return last

    def peek(self):
        """Current state as an instruction without consuming anything."""
        if self.dead:
            return self._last_error
        expected = _K.union_expected(self.threads)
        accepting = _K.any_complete(self.threads)
        if not expected and accepting:
            return Eof(position=self.position)
        return Expect(
            expected=expected,
            accepting=accepting,
            position=self.position,
            frames=self._frames(self.threads),
        )

    # -- queries -------------------------------------------------------

    @property
    def text(self) -> str:
        return "".join(self.consumed)

    @property
    def accepting(self) -> bool:
        if self.dead:
            return False
        return _K.any_complete(self.threads)

    def expected_next(self, *, significant_only: bool = False) -> CharSet:
        """Exact set of characters the grammar accepts next.

        With significant_only=True, characters reachable only by first
        crossing optional whitespace are folded away: the session reports
        what could follow after any run of skippable blanks instead.
        """
        if self.dead:
            raise DeadSessionError("session rejected earlier input")
        if not significant_only:
            return _K.union_expected(self.threads)
        return _significant_expected(
            self.threads, self.position, self.thread_cap, self._recursive
        )

    def error_report(self):
        """Structured report for the last rejection, or None."""
        return self._last_error

    def frames(self) -> tuple:
        """Active rule stack of one surviving thread, outermost first."""
        return self._frames(self.threads)

    # -- internals -----------------------------------------------------

    def _normalize(self) -> None:
        self.threads, steps = _K.normalize(
            self.threads,
            self.position,
            self.thread_cap,
            self.depth_cap,
            self._recursive,
            self.gamma,
        )
        self.stats.expand_steps += steps
        if len(self.threads) > _MERGE_THRESHOLD:
            if self.gamma is None:
                self.threads = _dedup_stacks(self.threads)
            else:
                self.threads = _merge_stacks(self.threads)

    @staticmethod
    def _frames(threads: list) -> tuple:
        for thread in threads:
            if thread[0] is not None:
                return _K.frames_of(thread)
        for thread in threads:
            return _K.frames_of(thread)
        return ()


_RECURSIVE_CACHE: "weakref.WeakKeyDictionary" = None


def _recursive_names(grammar: Grammar) -> frozenset:
    from .analysis import recursive_rules

    global _RECURSIVE_CACHE
    if _RECURSIVE_CACHE is None:
        import weakref

        _RECURSIVE_CACHE = weakref.WeakKeyDictionary()
    names = _RECURSIVE_CACHE.get(grammar)
    if names is None:
        names = recursive_rules(grammar)
        _RECURSIVE_CACHE[grammar] = names
    return names


def _significant_expected(
    threads: list, position: int, thread_cap: int, recursive: frozenset
) -> CharSet:
    """Expected set after skipping any optional whitespace runs.

    A frontier thread is whitespace-skippable when every character it could
    consume next is a blank. Those threads are advanced through each blank
    they accept (forking as needed) until only threads offering at least one
    non-blank remain; the union of their non-blank offerings is the answer.
    Skippable characters inside significant context (say, a space inside a
    quoted string alongside printable neighbours) survive because their
    thread also offers non-blanks.
    """
    live = _dedup_stacks(threads)
    seen = EMPTY_SET
    visited: set = set()
    for round_no in range(_SIGNIFICANT_ROUNDS):
        keep = []
        skippable = []
        for thread in live:
            stack = thread[0]
            if stack is None:
                continue
            key = _stack_key(stack)
            if key in visited:
                # a repeated continuation offers nothing new; whitespace
                # rules cycle back to themselves after one blank
                continue
            visited.add(key)
            item = stack[0]
            if item[0] == _K.ITEM_TEXT:
                blank = ord(item[1][item[2]]) in _WS_CODES
            else:
                blank = not (item[1] - _WS_SET)
            (skippable if blank else keep).append(thread)
        offered = _K.union_expected(keep)
        seen = seen | (offered - _WS_SET)
        if not skippable:
            break
        advanced = []
        for ch in _WS_CHARS:
            moved, _ = _K.feed_threads(skippable, ch)
            if moved:
                advanced.extend(moved)
        if not advanced:
            break
        live, _ = _K.normalize(
            _dedup_stacks(advanced), position + round_no + 1,
            thread_cap, None, recursive, None,
        )
    return seen


def _dedup_stacks(threads: list) -> list:
    """Drop threads whose continuation stacks are structurally identical.

    Ambiguous grammars reach the same continuation through different
    derivations; once the stacks agree the threads accept exactly the same
    futures, so only a representative needs to live on. Frame entry
    positions of dropped duplicates are irrelevant: epsilon-cycle checks
    only consult frames opened at the current position.
    """
    seen = set()
    out = []
    for thread in threads:
        key = _stack_key(thread[0])
        if key not in seen:
            seen.add(key)
            out.append(thread)
    return out


def _merge_stacks(threads: list) -> list:
    """Like _dedup_stacks but sums the probability mass of duplicates.

    Equal stacks carry equal frame-name sequences, so the decayed branch
    weighting of the surviving representative is exact for all members.
    """
    order: list = []
    table: dict = {}
    for thread in threads:
        key = _stack_key(thread[0])
        entry = table.get(key)
        if entry is None:
            entry = table[key] = (thread, [])
            order.append(key)
        entry[1].append(thread[2])
    out = []
    for key in order:
        rep, logws = table[key]
        if len(logws) == 1:
            out.append(rep)
        else:
            m = max(logws)
            merged = m + math.log(sum(math.exp(v - m) for v in logws))
            out.append((rep[0], rep[1], merged, rep[3]))
    return out


def _stack_key(stack) -> tuple:
    parts = []
    while stack is not None:
        item = stack[0]
        tag = item[0]
        if tag == _K.ITEM_TEXT:
            parts.append((0, item[1], item[2]))
        elif tag == _K.ITEM_CLASS:
            parts.append((1, item[1]))
        elif tag == _K.ITEM_REP:
            parts.append((4, id(item[1]), item[2]))
        else:
            parts.append((tag, id(item[1])))
        stack = stack[1]
    return tuple(parts)


def is_prefix(grammar: Grammar, text: str, **kw) -> bool:
    """True when text can be extended to (or already is) a member."""
    session = Session.start(grammar, **kw)
    for ch in text:
        if isinstance(session.feed(ch), Error):
            return False
    return True


def is_member(grammar: Grammar, text: str, **kw) -> bool:
    """True when text is a complete derivation of the grammar."""
    session = Session.start(grammar, **kw)
    for ch in text:
        if isinstance(session.feed(ch), Error):
            return False
    return session.accepting
