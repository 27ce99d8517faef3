"""Grammar symbol algebra and the combinators used to build grammars.

Symbols are immutable descriptions: terminals, character classes, nonterminal
references (possibly cyclic through deferred rule producers), sequences,
choices, bounded repetition, separator joins, the empty production, and
explicit sampler decision points. A Grammar ties a start nonterminal to the
registry of every rule reachable from it.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence as TSequence, Union

from .charset import CharSet, Scalar

SymbolLike = Union["GrammarSymbol", str, tuple, list]


class GrammarError(Exception):
    """Raised for malformed symbols or grammars."""


class GrammarSymbol:
    """Base class for every grammar symbol variant."""

    __slots__ = ("__weakref__",)


class Terminal(GrammarSymbol):
    """A literal, nonempty piece of text."""

    __slots__ = ("text",)

    def __init__(self, text: str) -> None:
        if not text:
            raise GrammarError("Terminal text must be nonempty; use Empty")
        self.text = text

    def __repr__(self) -> str:
        return f"Terminal({self.text!r})"


class CharClass(GrammarSymbol):
    """One character drawn from a set of scalar ranges minus exclusions."""

    __slots__ = ("chars",)

    def __init__(
        self,
        ranges: Iterable[tuple[Scalar, Scalar]],
        excluded: Iterable[Scalar] = (),
    ) -> None:
        chars = CharSet(ranges, excluded)
        if not chars:
            raise GrammarError("CharClass resolves to the empty set")
        self.chars = chars

    def __repr__(self) -> str:
        return f"CharClass({self.chars.preview()})"


class NonTerminal(GrammarSymbol):
    """A named rule reference; the body may be supplied late via define()."""

    __slots__ = ("name", "_producer", "_resolved")

    def __init__(
        self,
        name: str,
        rule: Union[SymbolLike, Callable[[], SymbolLike], None] = None,
    ) -> None:
        if not name or not name.isidentifier():
            raise GrammarError(f"nonterminal name must be an identifier: {name!r}")
        self.name = name
        self._producer: Union[Callable[[], SymbolLike], None] = None
        self._resolved: Union[GrammarSymbol, None] = None
        if rule is not None:
            self.define(rule)

    def define(self, rule: Union[SymbolLike, Callable[[], SymbolLike]]) -> "NonTerminal":
        if self._producer is not None or self._resolved is not None:
            raise GrammarError(f"rule {self.name!r} is already defined")
        if callable(rule) and not isinstance(rule, GrammarSymbol):
            self._producer = rule
        else:
            self._resolved = coerce(rule)
        return self

    def resolve(self) -> GrammarSymbol:
        if self._resolved is None:
            if self._producer is None:
                raise GrammarError(f"rule {self.name!r} was never defined")
            self._resolved = coerce(self._producer())
            self._producer = None
        return self._resolved

    def __repr__(self) -> str:
        return f"NonTerminal({self.name})"


class Sequence(GrammarSymbol):
    """Items derived one after another, left to right."""

    __slots__ = ("items",)

    def __init__(self, items: TSequence[SymbolLike]) -> None:
        self.items = tuple(coerce(item) for item in items)

    def __repr__(self) -> str:
        return f"Sequence({len(self.items)} items)"


class Choice(GrammarSymbol):
    """An ordered list of at least two alternative branches.

    Branches are addressed by zero-based index in declaration order. Parse-time
    factoring metadata and generation-time labels are cached lazily by the
    modules that need them (see _kernel and flatten).
    """

    __slots__ = ("branches", "_factored", "_labels")

    def __init__(self, branches: TSequence[SymbolLike]) -> None:
        if len(branches) < 2:
            raise GrammarError("Choice needs at least 2 branches")
        self.branches = tuple(coerce(b) for b in branches)
        self._factored = None
        self._labels = None

    def __repr__(self) -> str:
        return f"Choice({len(self.branches)} branches)"


class Repeat(GrammarSymbol):
    """item repeated a fixed count or a finite inclusive count range."""

    __slots__ = ("item", "lo", "hi")

    def __init__(self, item: SymbolLike, count: Union[int, tuple[int, int]]) -> None:
        if isinstance(count, tuple):
            lo, hi = count
        else:
            lo = hi = count
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise GrammarError("Repeat counts must be integers")
        if lo < 0 or hi < lo:
            raise GrammarError(f"bad Repeat range {lo}..{hi}")
        self.item = coerce(item)
        self.lo = lo
        self.hi = hi

    def __repr__(self) -> str:
        return f"Repeat({self.lo}..{self.hi})"


class Join(GrammarSymbol):
    """Items with a separator between adjacent pairs, never leading/trailing."""

    __slots__ = ("sep", "items", "_expanded")

    def __init__(self, sep: SymbolLike, items: SymbolLike) -> None:
        self.sep = coerce(sep)
        self.items = coerce(items)
        self._expanded: Union[GrammarSymbol, None] = None

    def expanded(self) -> GrammarSymbol:
        """Structural desugaring used by both derivation and generation."""
        if self._expanded is None:
            self._expanded = _expand_join(self.sep, self.items)
        return self._expanded

    def __repr__(self) -> str:
        return "Join(...)"


class Empty(GrammarSymbol):
    """Derives the empty string and emits nothing."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "Empty()"


EMPTY = Empty()


class SamplerRequest(GrammarSymbol):
    """An explicit decision point: labeled alternative branches plus a tag.

    Used directly as a grammar node when an author wants to control how a
    decision is presented to the sampler; Choice nodes are presented through
    the same structure when flattened.
    """

    __slots__ = ("options", "tag", "_factored", "_labels")

    def __init__(
        self, options: TSequence[tuple[str, SymbolLike]], tag: str = ""
    ) -> None:
        if len(options) < 2:
            raise GrammarError("SamplerRequest needs at least 2 options")
        self.options = tuple((str(label), coerce(sym)) for label, sym in options)
        self.tag = tag
        self._factored = None
        self._labels = None

    @property
    def branches(self) -> tuple[GrammarSymbol, ...]:
        return tuple(sym for _, sym in self.options)

    def __repr__(self) -> str:
        return f"SamplerRequest({len(self.options)} options, tag={self.tag!r})"


# -- coercion and combinators -------------------------------------------------


def coerce(value: SymbolLike) -> GrammarSymbol:
    """str -> Terminal ('' -> Empty); tuple/list -> Sequence; symbols pass."""
    if isinstance(value, GrammarSymbol):
        return value
    if isinstance(value, str):
        return EMPTY if value == "" else Terminal(value)
    if isinstance(value, (tuple, list)):
        return Sequence(value)
    raise GrammarError(f"cannot use {value!r} as a grammar symbol")


def select(*branches: SymbolLike) -> Choice:
    """A Choice preserving branch order; rejects fewer than two branches."""
    return Choice(branches)


def optional(*items: SymbolLike) -> Choice:
    """Choice(Empty, items...): branch 0 derives nothing, branch 1 the items."""
    if not items:
        raise GrammarError("optional needs at least one item")
    body = coerce(items[0]) if len(items) == 1 else Sequence(items)
    return Choice((EMPTY, body))


def repeat(item: SymbolLike, count: Union[int, tuple[int, int]]) -> Repeat:
    return Repeat(item, count)


def join(sep: SymbolLike, items: SymbolLike) -> Join:
    return Join(sep, items)


def accept(
    *ranges: tuple[Scalar, Scalar], excluded: Iterable[Scalar] = ()
) -> CharClass:
    """A CharClass over inclusive scalar ranges minus excluded scalars."""
    return CharClass(ranges, excluded)


def _expand_join(sep: GrammarSymbol, items: GrammarSymbol) -> GrammarSymbol:
    if isinstance(items, Sequence):
        if not items.items:
            return EMPTY
        parts: list[GrammarSymbol] = []
        for i, item in enumerate(items.items):
            if i:
                parts.append(sep)
            parts.append(item)
        return Sequence(parts)
    if isinstance(items, Repeat):
        lo, hi, item = items.lo, items.hi, items.item
        if hi == 0:
            return EMPTY
        rest = Repeat(Sequence((sep, item)), (max(lo - 1, 0), hi - 1))
        joined = Sequence((item, rest))
        if lo == 0:
            return Choice((EMPTY, joined))
        return joined
    # single item: no separator at all
    return items


# -- grammar ------------------------------------------------------------------


class Grammar:
    """A start nonterminal plus the registry of every reachable rule."""

    __slots__ = ("start", "rules", "__weakref__")

    def __init__(self, start: NonTerminal) -> None:
        self.start = start
        self.rules: dict[str, NonTerminal] = {}
        self._collect(start)

    def _collect(self, root: NonTerminal) -> None:
        pending = [root]
        seen: set[int] = set()
        while pending:
            node = pending.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            existing = self.rules.get(node.name)
            if existing is not None and existing is not node:
                raise GrammarError(f"duplicate rule name {node.name!r}")
            self.rules[node.name] = node
            pending.extend(_referenced(node.resolve()))

    def rule(self, name: str) -> NonTerminal:
        try:
            return self.rules[name]
        except KeyError:
            raise GrammarError(f"unknown rule {name!r}") from None

    def __repr__(self) -> str:
        return f"Grammar(start={self.start.name}, rules={len(self.rules)})"


def _referenced(symbol: GrammarSymbol) -> list[NonTerminal]:
    """Direct nonterminal references inside one rule body (no resolution)."""
    out: list[NonTerminal] = []
    stack = [symbol]
    while stack:
        node = stack.pop()
        if isinstance(node, NonTerminal):
            out.append(node)
        elif isinstance(node, Sequence):
            stack.extend(node.items)
        elif isinstance(node, Choice):
            stack.extend(node.branches)
        elif isinstance(node, Repeat):
            stack.append(node.item)
        elif isinstance(node, Join):
            stack.append(node.sep)
            stack.append(node.items)
        elif isinstance(node, SamplerRequest):
            stack.extend(node.branches)
    return out


def referenced_names(symbol: GrammarSymbol) -> frozenset[str]:
    """Names of nonterminals syntactically referenced by `symbol`."""
    return frozenset(nt.name for nt in _referenced(symbol))
