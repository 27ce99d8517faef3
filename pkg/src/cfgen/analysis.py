"""Static grammar analysis: First sets, productivity, and recursion structure.

First sets follow the classic three rules (a terminal head contributes its
first character; a nonterminal head contributes its First set, plus the
follower's if it is nullable; an empty production contributes nullability).
The computation is recursive with in-progress marking, so direct and indirect
left recursion is detected and reported as a cycle instead of looping.
"""

from __future__ import annotations

from dataclasses import dataclass

from .charset import CharSet, EMPTY_SET
from .symbols import (
    CharClass,
    Choice,
    Empty,
    Grammar,
    GrammarError,
    GrammarSymbol,
    Join,
    NonTerminal,
    Repeat,
    SamplerRequest,
    Sequence,
    Terminal,
    referenced_names,
)


class LeftRecursionError(GrammarError):
    """A rule derives a string beginning with itself; carries the cycle."""

    def __init__(self, cycle: list[str]) -> None:
        self.cycle = list(cycle)
        loop = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"left recursion: {loop}")


@dataclass(frozen=True)
class FirstInfo:
    """First characters of a symbol plus whether it can derive nothing."""

    chars: CharSet
    nullable: bool


def first_set(grammar: Grammar, name: str) -> FirstInfo:
    """First set of a registered rule; raises LeftRecursionError on cycles."""
    node = grammar.rule(name)
    return _first(node, in_progress=[], cache={})


def symbol_first(symbol: GrammarSymbol) -> FirstInfo:
    """First set of a free-standing symbol (same algorithm, same caveats)."""
    return _first(symbol, in_progress=[], cache={})


def _first(
    symbol: GrammarSymbol,
    in_progress: list[NonTerminal],
    cache: dict[int, FirstInfo],
) -> FirstInfo:
    if isinstance(symbol, Terminal):
        return FirstInfo(CharSet.of(symbol.text[0]), False)
    if isinstance(symbol, CharClass):
        return FirstInfo(symbol.chars, False)
    if isinstance(symbol, Empty):
        return FirstInfo(EMPTY_SET, True)
    if isinstance(symbol, NonTerminal):
        hit = cache.get(id(symbol))
        if hit is not None:
            return hit
        if any(symbol is seen for seen in in_progress):
            start = next(i for i, seen in enumerate(in_progress) if seen is symbol)
            raise LeftRecursionError([nt.name for nt in in_progress[start:]])
        in_progress.append(symbol)
        try:
            info = _first(symbol.resolve(), in_progress, cache)
        finally:
            in_progress.pop()
        cache[id(symbol)] = info
        return info
    if isinstance(symbol, Sequence):
        chars = EMPTY_SET
        for item in symbol.items:
            info = _first(item, in_progress, cache)
            chars = chars | info.chars
            if not info.nullable:
                return FirstInfo(chars, False)
        return FirstInfo(chars, True)
    if isinstance(symbol, (Choice, SamplerRequest)):
        chars = EMPTY_SET
        nullable = False
        for branch in symbol.branches:
            info = _first(branch, in_progress, cache)
            chars = chars | info.chars
            nullable = nullable or info.nullable
        return FirstInfo(chars, nullable)
    if isinstance(symbol, Repeat):
        info = _first(symbol.item, in_progress, cache)
        return FirstInfo(info.chars, info.nullable or symbol.lo == 0)
    if isinstance(symbol, Join):
        return _first(symbol.expanded(), in_progress, cache)
    raise GrammarError(f"cannot compute First of {symbol!r}")


# -- productivity -------------------------------------------------------------


def productive_rules(grammar: Grammar) -> frozenset[str]:
    """Rules that derive at least one finite string (fixed point iteration)."""
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, node in grammar.rules.items():
            if name in productive:
                continue
            if _productive(node.resolve(), productive):
                productive.add(name)
                changed = True
    return frozenset(productive)


def _productive(symbol: GrammarSymbol, known: set[str]) -> bool:
    if isinstance(symbol, (Terminal, CharClass, Empty)):
        return True
    if isinstance(symbol, NonTerminal):
        return symbol.name in known
    if isinstance(symbol, Sequence):
        return all(_productive(item, known) for item in symbol.items)
    if isinstance(symbol, (Choice, SamplerRequest)):
        return any(_productive(branch, known) for branch in symbol.branches)
    if isinstance(symbol, Repeat):
        return symbol.lo == 0 or _productive(symbol.item, known)
    if isinstance(symbol, Join):
        return _productive(symbol.expanded(), known)
    return False


# -- total First --------------------------------------------------------------


def total_first(symbol: GrammarSymbol) -> FirstInfo:
    """First set by Kleene iteration over the symbol's rule closure.

    Unlike the recursive algorithm above, this converges on every grammar
    shape including left recursion, at the cost of not detecting cycles.
    Generation-side metadata uses it so option tables exist even for rules
    the recursive analyzer refuses.
    """
    rules = _rule_closure(symbol)
    info: dict[int, FirstInfo] = {
        id(nt): FirstInfo(EMPTY_SET, False) for nt in rules
    }

    def of(node: GrammarSymbol) -> FirstInfo:
        if isinstance(node, Terminal):
            return FirstInfo(CharSet.of(node.text[0]), False)
        if isinstance(node, CharClass):
            return FirstInfo(node.chars, False)
        if isinstance(node, Empty):
            return FirstInfo(EMPTY_SET, True)
        if isinstance(node, NonTerminal):
            return info[id(node)]
        if isinstance(node, Sequence):
            chars = EMPTY_SET
            for item in node.items:
                sub = of(item)
                chars = chars | sub.chars
                if not sub.nullable:
                    return FirstInfo(chars, False)
            return FirstInfo(chars, True)
        if isinstance(node, (Choice, SamplerRequest)):
            chars = EMPTY_SET
            nullable = False
            for branch in node.branches:
                sub = of(branch)
                chars = chars | sub.chars
                nullable = nullable or sub.nullable
            return FirstInfo(chars, nullable)
        if isinstance(node, Repeat):
            sub = of(node.item)
            return FirstInfo(sub.chars, sub.nullable or node.lo == 0)
        if isinstance(node, Join):
            return of(node.expanded())
        raise GrammarError(f"cannot compute First of {node!r}")

    changed = True
    while changed:
        changed = False
        for nt in rules:
            new = of(nt.resolve())
            if new != info[id(nt)]:
                info[id(nt)] = new
                changed = True
    return of(symbol)


def recursive_names(symbol: GrammarSymbol) -> frozenset[str]:
    """Names of rules in the symbol's closure that can re-enter themselves."""
    rules = _rule_closure(symbol)
    refs = {nt.name: referenced_names(nt.resolve()) for nt in rules}
    reach: dict[str, set[str]] = {name: set(direct) for name, direct in refs.items()}
    changed = True
    while changed:
        changed = False
        for name, seen in reach.items():
            add: set[str] = set()
            for other in seen:
                add |= reach.get(other, set())
            if not add <= seen:
                seen |= add
                changed = True
    return frozenset(name for name, seen in reach.items() if name in seen)


def _rule_closure(symbol: GrammarSymbol) -> list[NonTerminal]:
    """Every nonterminal reachable from the symbol, in discovery order."""
    out: list[NonTerminal] = []
    seen: set[int] = set()
    stack: list[GrammarSymbol] = [symbol]
    while stack:
        node = stack.pop()
        if isinstance(node, NonTerminal):
            if id(node) in seen:
                continue
            seen.add(id(node))
            out.append(node)
            stack.append(node.resolve())
        elif isinstance(node, Sequence):
            stack.extend(node.items)
        elif isinstance(node, (Choice, SamplerRequest)):
            stack.extend(node.branches)
        elif isinstance(node, Repeat):
            stack.append(node.item)
        elif isinstance(node, Join):
            stack.append(node.expanded())
    return out


# -- recursion structure ------------------------------------------------------


def recursive_rules(grammar: Grammar) -> frozenset[str]:
    """Rules reachable from themselves through the reference graph."""
    refs: dict[str, frozenset[str]] = {
        name: referenced_names(node.resolve())
        for name, node in grammar.rules.items()
    }
    reach: dict[str, set[str]] = {name: set(direct) for name, direct in refs.items()}
    changed = True
    while changed:
        changed = False
        for name, seen in reach.items():
            add: set[str] = set()
            for other in seen:
                add |= reach.get(other, set())
            if not add <= seen:
                seen |= add
                changed = True
    return frozenset(name for name, seen in reach.items() if name in seen)
