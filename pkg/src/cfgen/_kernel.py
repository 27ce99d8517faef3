"""Hot derivation kernel: speculative thread stepping over persistent stacks.

A derivation thread is a 4-tuple (stack, frames, logw, depth):

- stack: persistent cons list of continuation items, top first; None when the
  derivation is complete. Items are tuples tagged by the first element.
- frames: persistent cons list of (nonterminal, entry position) pairs, top
  first, mirroring active rule expansions.
- logw: log of the thread's relative weight under cascaded uniform branch
  choices with decay; only maintained when a gamma is supplied.
- depth: current frame count, maintained incrementally.

Because stacks and frames are persistent (shared tails), forking a thread at
an ambiguous choice is O(1) and cloning a whole session is a list copy.

This module is deliberately self-contained and allocation-light so it can be
compiled as-is (see setup.py); the plain-Python module is the fallback.
"""

from __future__ import annotations

import weakref
from math import exp, log

from .charset import CharSet, EMPTY_SET
from .errors import KernelInvariantError, ThreadCapError
from .symbols import (
    CharClass,
    Choice,
    Empty,
    GrammarSymbol,
    Join,
    NonTerminal,
    Repeat,
    SamplerRequest,
    Sequence,
    Terminal,
    referenced_names,
)

ITEM_TEXT = 0   # (ITEM_TEXT, text, offset)
ITEM_CLASS = 1  # (ITEM_CLASS, charset)
ITEM_NODE = 2   # (ITEM_NODE, symbol)
ITEM_POP = 3    # (ITEM_POP, nonterminal)
ITEM_REP = 4    # (ITEM_REP, item symbol, remaining count)

MOVE_TEXT = "text"
MOVE_CLASS = "class"
MOVE_EOS = "eos"

_MAX_NORMALIZE_STEPS = 500_000

# Keyed by the symbol itself, weakly: entries must die with their symbol,
# or a recycled address could hand a new node another grammar's name set.
_refs_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _refs(symbol: GrammarSymbol) -> frozenset:
    refs = _refs_cache.get(symbol)
    if refs is None:
        refs = referenced_names(symbol)
        _refs_cache[symbol] = refs
    return refs


def seed_threads(start: NonTerminal) -> list:
    return [(((ITEM_NODE, start), None), None, 0.0, 0)]


def _factor(node) -> list:
    """Factored expansion plan for a Choice or SamplerRequest node.

    Branches with the same head symbol (same terminal text, same character
    class, or the same node) are grouped: the head is pushed once and the
    remainders become a deferred sub-choice. Returns a list of
    (head symbol, continuation symbol or None, member reference-name sets).
    """
    plan = node._factored
    if plan is not None:
        return plan
    order: list = []
    groups: dict = {}
    for branch in node.branches:
        head, cont = _peel(branch)
        if isinstance(head, Terminal):
            key = ("t", head.text)
        elif isinstance(head, CharClass):
            key = ("c", head.chars)
        elif isinstance(head, Empty):
            key = ("e",)
        else:
            key = ("o", id(head))
        entry = groups.get(key)
        if entry is None:
            entry = groups[key] = (head, [], [])
            order.append(key)
        entry[1].append(cont)
        entry[2].append(_refs(branch))
    plan = []
    for key in order:
        head, conts, refs = groups[key]
        if len(conts) == 1:
            cont = conts[0]
        else:
            cont = Choice([c if c is not None else Empty() for c in conts])
        plan.append((head, cont, tuple(refs)))
    node._factored = plan
    return plan


def _peel(branch: GrammarSymbol):
    """Split a branch into (head symbol, rest-of-branch symbol or None)."""
    if isinstance(branch, Sequence) and branch.items:
        items = branch.items
        if len(items) == 1:
            return items[0], None
        if len(items) == 2:
            return items[0], items[1]
        return items[0], Sequence(items[1:])
    if isinstance(branch, Sequence):
        return Empty(), None
    return branch, None


def normalize(
    threads: list,
    pos: int,
    thread_cap: int,
    depth_cap,
    recursive_names: frozenset,
    gamma,
) -> tuple:
    """Expand every thread until its top item is a terminal frontier.

    Returns (frontier threads, expansion steps). Threads whose expansion can
    only pump an epsilon cycle (re-entering a rule at the same position) are
    dropped; in generation mode (depth_cap set) expansions of recursive rules
    beyond the cap are dropped as well.
    """
    queue = list(threads)
    queue.reverse()
    out: list = []
    steps = 0
    while queue:
        steps += 1
        if steps > _MAX_NORMALIZE_STEPS:
            raise KernelInvariantError(
                f"normalization did not settle at position {pos}"
            )
        thread = queue.pop()
        stack = thread[0]
        if stack is None:
            out.append(thread)
            continue
        item = stack[0]
        tag = item[0]
        if tag == ITEM_TEXT or tag == ITEM_CLASS:
            out.append(thread)
            continue
        rest = stack[1]
        frames = thread[1]
        logw = thread[2]
        depth = thread[3]
        if tag == ITEM_POP:
            queue.append((rest, frames[1], logw, depth - 1))
            continue
        if tag == ITEM_REP:
            node, remaining = item[1], item[2]
            if remaining == 0:
                queue.append((rest, frames, logw, depth))
                continue
            again = ((ITEM_NODE, node), ((ITEM_REP, node, remaining - 1), rest))
            if gamma is None:
                queue.append((rest, frames, logw, depth))
                queue.append((again, frames, logw, depth))
            else:
                w_stop = 1.0
                w_more = gamma ** _reentries(frames, _refs(node))
                total = w_stop + w_more
                queue.append((rest, frames, logw + log(w_stop / total), depth))
                queue.append((again, frames, logw + log(w_more / total), depth))
            if len(queue) + len(out) > thread_cap:
                raise ThreadCapError(pos, thread_cap)
            continue
        node = item[1]
        cls = node.__class__
        if cls is Terminal:
            queue.append((((ITEM_TEXT, node.text, 0), rest), frames, logw, depth))
        elif cls is CharClass:
            queue.append((((ITEM_CLASS, node.chars), rest), frames, logw, depth))
        elif cls is NonTerminal:
            scan = frames
            cyclic = False
            while scan is not None and scan[0][1] == pos:
                if scan[0][0] is node:
                    cyclic = True
                    break
                scan = scan[1]
            if cyclic:
                continue
            if (
                depth_cap is not None
                and depth >= depth_cap
                and node.name in recursive_names
            ):
                continue
            body = node.resolve()
            new_frames = ((node, pos), frames)
            new_stack = ((ITEM_NODE, body), ((ITEM_POP, node), rest))
            queue.append((new_stack, new_frames, logw, depth + 1))
        elif cls is Sequence:
            for sub in reversed(node.items):
                rest = ((ITEM_NODE, sub), rest)
            queue.append((rest, frames, logw, depth))
        elif cls is Empty:
            queue.append((rest, frames, logw, depth))
        elif cls is Choice or cls is SamplerRequest:
            plan = _factor(node)
            if len(plan) == 1:
                head, cont, _ = plan[0]
                if cont is not None:
                    rest = ((ITEM_NODE, cont), rest)
                queue.append((((ITEM_NODE, head), rest), frames, logw, depth))
            else:
                if gamma is None:
                    shares = None
                else:
                    weights = []
                    for _h, _c, member_refs in plan:
                        w = 0.0
                        for refs in member_refs:
                            w += gamma ** _reentries(frames, refs)
                        weights.append(w)
                    total = sum(weights)
                    shares = [w / total for w in weights]
                for idx in range(len(plan) - 1, -1, -1):
                    head, cont, _ = plan[idx]
                    sub = rest
                    if cont is not None:
                        sub = ((ITEM_NODE, cont), sub)
                    sub = ((ITEM_NODE, head), sub)
                    w = logw if shares is None else logw + log(shares[idx])
                    queue.append((sub, frames, w, depth))
                if len(queue) + len(out) > thread_cap:
                    raise ThreadCapError(pos, thread_cap)
        elif cls is Repeat:
            rest2 = rest
            if node.hi > node.lo:
                rest2 = ((ITEM_REP, node.item, node.hi - node.lo), rest2)
            for _ in range(node.lo):
                rest2 = ((ITEM_NODE, node.item), rest2)
            queue.append((rest2, frames, logw, depth))
        elif cls is Join:
            queue.append((((ITEM_NODE, node.expanded()), rest), frames, logw, depth))
        else:
            raise KernelInvariantError(f"unexpandable node {node!r}")
    return out, steps


def _reentries(frames, refs: frozenset) -> int:
    count = 0
    while frames is not None:
        if frames[0][0].name in refs:
            count += 1
        frames = frames[1]
    return count


def feed_threads(threads: list, ch: str) -> tuple:
    """Advance every thread that accepts `ch`; completed threads die.

    Returns (advanced raw threads or None when nothing matched, attempts).
    The result still needs normalize().
    """
    code = ord(ch)
    advanced: list = []
    attempts = 0
    for thread in threads:
        stack = thread[0]
        if stack is None:
            continue
        attempts += 1
        item = stack[0]
        if item[0] == ITEM_TEXT:
            text = item[1]
            off = item[2]
            if text[off] == ch:
                off += 1
                if off == len(text):
                    new_stack = stack[1]
                else:
                    new_stack = ((ITEM_TEXT, text, off), stack[1])
                advanced.append((new_stack, thread[1], thread[2], thread[3]))
        else:
            if code in item[1]:
                advanced.append((stack[1], thread[1], thread[2], thread[3]))
    if not advanced:
        return None, attempts
    return advanced, attempts


def union_expected(threads: list) -> CharSet:
    """Union of acceptable next scalars across live threads."""
    singles: list = []
    classes: list = []
    for thread in threads:
        stack = thread[0]
        if stack is None:
            continue
        item = stack[0]
        if item[0] == ITEM_TEXT:
            singles.append(item[1][item[2]])
        else:
            classes.append(item[1])
    out = CharSet([(c, c) for c in singles]) if singles else EMPTY_SET
    for cs in classes:
        out = out | cs
    return out


def any_complete(threads: list) -> bool:
    for thread in threads:
        if thread[0] is None:
            return True
    return False


def frames_of(thread) -> tuple:
    """(name, entry position) pairs of one thread, outermost first."""
    out = []
    frames = thread[1]
    while frames is not None:
        out.append((frames[0][0].name, frames[0][1]))
        frames = frames[1]
    out.reverse()
    return tuple(out)


def frontier_moves(threads: list, include_eos: bool) -> list:
    """Distinct frontier items across threads, weight-merged.

    Returns a list of (kind, payload, logw, member threads) where payload is
    the remaining terminal text for MOVE_TEXT, the CharSet for MOVE_CLASS, and
    None for MOVE_EOS.
    """
    order: list = []
    table: dict = {}
    for thread in threads:
        stack = thread[0]
        if stack is None:
            if not include_eos:
                continue
            key = ("e",)
            kind = MOVE_EOS
            payload = None
        else:
            item = stack[0]
            if item[0] == ITEM_TEXT:
                payload = item[1][item[2]:]
                key = ("t", payload)
                kind = MOVE_TEXT
            else:
                payload = item[1]
                key = ("c", payload)
                kind = MOVE_CLASS
        entry = table.get(key)
        if entry is None:
            entry = table[key] = [kind, payload, [], []]
            order.append(key)
        entry[2].append(thread[2])
        entry[3].append(thread)
    moves = []
    for key in order:
        kind, payload, logws, members = table[key]
        moves.append((kind, payload, _logsumexp(logws), members))
    return moves


def _logsumexp(values: list) -> float:
    m = max(values)
    if len(values) == 1:
        return m
    return m + log(sum(exp(v - m) for v in values))


def kernel_backend() -> str:
    """'compiled' when this module is running as a C extension."""
    path = __file__ or ""
    return "compiled" if path.endswith((".so", ".pyd")) else "pure"
