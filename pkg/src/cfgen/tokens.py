"""Token vocabularies, validity masks, and the masked decode loop.

A vocabulary maps dense integer ids to token strings plus one end-of-output
token. token_mask answers, for a live derivation session, which tokens can
be fed next without leaving the language's prefix set; tokens sharing a
prefix share the verification work through a trie. decode_loop runs an
autoregressive sampler against those masks, so its output is a member of
the language whenever masking is on.

Vocabulary file format: one `<id><TAB><token>` line per token, UTF-8, with
exactly the escapes \\n \\t \\\\ and \\uXXXX inside the token field, and a
single `<id><TAB>!EOS` line for the end token. Ids must be dense from 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import (
    BackendError,
    DeadSessionError,
    KernelInvariantError,
    VocabError,
)
from .sampling import temperature_scale
from .session import Error, Session
from .symbols import Grammar

_EOS_FIELD = "!EOS"
_ESCAPE_RE = re.compile(r"\\(n|t|\\|u[0-9a-fA-F]{4})")


class Vocab:
    """Dense id -> token table with one end-of-output id."""

    __slots__ = ("texts", "eos_id")

    def __init__(self, texts: list, eos_id: int) -> None:
        self.texts = texts          # entry at eos_id is None
        self.eos_id = eos_id

    @property
    def size(self) -> int:
        return len(self.texts)

    def text(self, token_id: int) -> Optional[str]:
        return self.texts[token_id]

    def __repr__(self) -> str:
        return f"Vocab(size={self.size}, eos_id={self.eos_id})"


def make_vocab(tokens: Iterable[str]) -> Vocab:
    """Vocab from plain token strings; EOS is appended as the last id."""
    texts: list = []
    for token in tokens:
        if not isinstance(token, str) or not token:
            raise VocabError(f"token must be a nonempty string, got {token!r}")
        texts.append(token)
    texts.append(None)
    return Vocab(texts, len(texts) - 1)


def parse_vocab(text: str) -> Vocab:
    entries: dict[int, Optional[str]] = {}
    eos_id: Optional[int] = None
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        head, tab, raw = line.partition("\t")
        if not tab:
            raise VocabError(f"line {lineno}: missing tab separator")
        try:
            token_id = int(head)
        except ValueError:
            raise VocabError(f"line {lineno}: bad token id {head!r}") from None
        if token_id < 0:
            raise VocabError(f"line {lineno}: negative token id {token_id}")
        if token_id in entries:
            raise VocabError(f"line {lineno}: duplicate token id {token_id}")
        if raw == _EOS_FIELD:
            if eos_id is not None:
                raise VocabError(f"line {lineno}: second {_EOS_FIELD} entry")
            eos_id = token_id
            entries[token_id] = None
            continue
        entries[token_id] = _unescape(raw, lineno)
    if eos_id is None:
        raise VocabError(f"vocabulary has no {_EOS_FIELD} entry")
    size = len(entries)
    if sorted(entries) != list(range(size)):
        raise VocabError("token ids must be dense from 0")
    texts = [entries[i] for i in range(size)]
    for i, token in enumerate(texts):
        if token == "":
            raise VocabError(f"token id {i} is empty")
    return Vocab(texts, eos_id)


def dump_vocab(vocab: Vocab) -> str:
    lines = []
    for token_id, token in enumerate(vocab.texts):
        if token_id == vocab.eos_id:
            lines.append(f"{token_id}\t{_EOS_FIELD}")
        else:
            lines.append(f"{token_id}\t{_escape(token)}")
    return "\n".join(lines) + "\n"


def load_vocab(path) -> Vocab:
    with open(path, encoding="utf-8") as handle:
        return parse_vocab(handle.read())


def _escape(token: str) -> str:
    out = []
    for ch in token:
        if ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    text = "".join(out)
    if text == _EOS_FIELD:
        # a literal "!EOS" token must not collide with the end marker
        return "\\u0021EOS"
    return text


def _unescape(raw: str, lineno: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        m = _ESCAPE_RE.match(raw, i)
        if m is None:
            raise VocabError(f"line {lineno}: bad escape at column {i + 1}")
        body = m.group(1)
        if body == "n":
            out.append("\n")
        elif body == "t":
            out.append("\t")
        elif body == "\\":
            out.append("\\")
        else:
            out.append(chr(int(body[1:], 16)))
        i = m.end()
    return "".join(out)


# -- masks ----------------------------------------------------------------


@dataclass
class MaskStats:
    feeds: int = 0
    calls: int = 0


def token_trie(vocab: Vocab) -> dict:
    """Prefix tree over token texts: char -> (children, ids ending here).

    Build once and pass to token_mask when masking repeatedly; tokens that
    share a prefix then share the verification feeds."""
    root: dict = {}
    for token_id, token in enumerate(vocab.texts):
        if token is None:
            continue
        node = root
        entry = None
        for ch in token:
            entry = node.get(ch)
            if entry is None:
                entry = ({}, [])
                node[ch] = entry
            node = entry[0]
        entry[1].append(token_id)
    return root


def token_mask(
    session: Session,
    vocab: Vocab,
    *,
    trie: Optional[dict] = None,
    stats: Optional[MaskStats] = None,
) -> np.ndarray:
    """Boolean vector: mask[id] is True iff feeding that token keeps the
    session inside the prefix language. The EOS bit is True iff the current
    text is already a member."""
    if session.dead:
        raise DeadSessionError("cannot mask against a dead session")
    if trie is None:
        trie = token_trie(vocab)
    if stats is not None:
        stats.calls += 1
    mask = np.zeros(vocab.size, dtype=bool)
    mask[vocab.eos_id] = session.accepting
    expected = session.expected_next()
    stack = [(trie, session)]
    while stack:
        node, state = stack.pop()
        for ch, (children, ends) in node.items():
            if state is session and ch not in expected:
                continue
            probe = state.clone()
            if stats is not None:
                stats.feeds += 1
            if isinstance(probe.feed(ch), Error):
                continue
            for token_id in ends:
                mask[token_id] = True
            if children:
                stack.append((children, probe))
    return mask


def apply_mask(
    logits, mask: np.ndarray, *, mode: str = "hard", bias: float = 12.0
) -> np.ndarray:
    """Hard masking pins disallowed logits at -inf; soft subtracts a bias."""
    z = np.asarray(logits, dtype=float).copy()
    if z.shape != mask.shape:
        raise ValueError(
            f"logits shape {z.shape} does not match mask shape {mask.shape}"
        )
    if mode == "hard":
        z[~mask] = -np.inf
    elif mode == "soft":
        z[~mask] -= bias
    else:
        raise ValueError(f"unknown mask mode {mode!r}")
    return z


# -- decoding -------------------------------------------------------------


@dataclass
class DecodeResult:
    text: str
    ok: bool
    reason: str                 # "eos" | "rejected" | "budget" | "premature-eos"
    token_count: int
    mask_stats: MaskStats = field(default_factory=MaskStats)


def decode_loop(
    grammar: Grammar,
    backend: Callable[[str], np.ndarray],
    vocab: Vocab,
    *,
    seed: int = 0,
    temperature: float = 1.0,
    max_tokens: int = 256,
    masked: bool = True,
    prompt: str = "",
    thread_cap: int = 64,
) -> DecodeResult:
    """Sample token ids from backend logits until EOS, feeding each token's
    characters into a derivation session. With masking on the result is a
    member of the language by construction; with masking off the backend is
    free to leave the language, which the result records."""
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    rng = np.random.default_rng(seed)
    session = Session.start(grammar, thread_cap=thread_cap)
    trie = token_trie(vocab)
    stats = MaskStats()
    out: list[str] = []
    ids = np.arange(vocab.size)

    for step in range(max_tokens):
        context = prompt + "".join(out)
        try:
            logits = np.asarray(backend(context), dtype=float)
        except BackendError:
            raise
        if logits.shape != (vocab.size,):
            raise BackendError(
                f"backend returned shape {logits.shape}, expected ({vocab.size},)"
            )
        if masked:
            mask = token_mask(session, vocab, trie=trie, stats=stats)
            if not mask.any():
                raise KernelInvariantError(
                    "decode dead end: no token fits and the text is not a member"
                )
            logits = apply_mask(logits, mask)
        probs = temperature_scale(logits, temperature)
        token_id = int(rng.choice(ids, p=probs))
        if token_id == vocab.eos_id:
            if session.accepting:
                return DecodeResult("".join(out), True, "eos", step, stats)
            return DecodeResult("".join(out), False, "premature-eos", step, stats)
        token = vocab.texts[token_id]
        probe = session.clone()
        rejected = False
        for ch in token:
            stats.feeds += 1
            if isinstance(probe.feed(ch), Error):
                rejected = True
                break
        if rejected:
            if masked:
                raise KernelInvariantError(
                    f"masked token {token!r} was rejected mid-feed"
                )
            out.append(token)
            return DecodeResult("".join(out), False, "rejected", step + 1, stats)
        session = probe
        out.append(token)
    return DecodeResult("".join(out), False, "budget", max_tokens, stats)
