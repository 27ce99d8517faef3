"""Turning a grammar symbol into characters, one sampler decision at a time.

flatten() walks a symbol tree as a Python generator: literal text streams out
directly, and every genuine decision — which branch of a choice, which scalar
of a character class, how many repetitions — suspends the walk and asks a
chooser callback. The answer sequence fully determines the output, and any
completed walk yields a member of the symbol's language by construction.

Requests carry the enclosing rule-name stack (outermost first) so choosers
can weight decisions by recursion depth; errors raised mid-walk carry the
same stack for diagnosis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

from .analysis import recursive_names, total_first
from .charset import CharSet
from .errors import BadAnswerError
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


@dataclass(frozen=True)
class BranchOption:
    """One selectable branch of a choice, annotated for choosers."""

    index: int
    label: str
    first: CharSet
    nullable: bool
    refs: frozenset
    recursive: bool


@dataclass(frozen=True)
class BranchRequest:
    """Pick one option by zero-based index."""

    options: tuple[BranchOption, ...]
    tag: str
    frames: tuple[str, ...]


@dataclass(frozen=True)
class ScalarRequest:
    """Pick one concrete character from the set."""

    chars: CharSet
    frames: tuple[str, ...]


@dataclass(frozen=True)
class CountRequest:
    """Pick a repetition count in the inclusive range."""

    lo: int
    hi: int
    frames: tuple[str, ...]


Request = Union[BranchRequest, ScalarRequest, CountRequest]
Chooser = Callable[[Request], object]

_POP = object()


def flatten(symbol: GrammarSymbol, chooser: Chooser) -> Iterator[str]:
    """Stream the characters of one derivation of `symbol`.

    The stream is deterministic given the chooser's answers and never
    rescans: state lives entirely in the suspended walk.
    """
    frames: list[str] = []
    stack: list[object] = [symbol]
    while stack:
        node = stack.pop()
        if node is _POP:
            frames.pop()
            continue
        if isinstance(node, Terminal):
            yield from node.text
        elif isinstance(node, CharClass):
            request = ScalarRequest(node.chars, tuple(frames))
            answer = _ask(chooser, request, frames)
            if not (isinstance(answer, str) and len(answer) == 1
                    and ord(answer) in node.chars):
                raise _bad(
                    f"scalar answer {answer!r} is not in {node.chars.preview()}",
                    frames,
                )
            yield answer
        elif isinstance(node, NonTerminal):
            frames.append(node.name)
            stack.append(_POP)
            stack.append(node.resolve())
        elif isinstance(node, Sequence):
            for item in reversed(node.items):
                stack.append(item)
        elif isinstance(node, Empty):
            pass
        elif isinstance(node, (Choice, SamplerRequest)):
            options = branch_options(node)
            tag = node.tag if isinstance(node, SamplerRequest) else ""
            request = BranchRequest(options, tag, tuple(frames))
            answer = _ask(chooser, request, frames)
            if not (isinstance(answer, int) and 0 <= answer < len(options)):
                raise _bad(
                    f"branch answer {answer!r} is outside 0..{len(options) - 1}",
                    frames,
                )
            stack.append(node.branches[answer])
        elif isinstance(node, Repeat):
            if node.lo == node.hi:
                count = node.lo
            else:
                request = CountRequest(node.lo, node.hi, tuple(frames))
                answer = _ask(chooser, request, frames)
                if not (isinstance(answer, int) and node.lo <= answer <= node.hi):
                    raise _bad(
                        f"count answer {answer!r} is outside "
                        f"{node.lo}..{node.hi}",
                        frames,
                    )
                count = answer
            for _ in range(count):
                stack.append(node.item)
        elif isinstance(node, Join):
            stack.append(node.expanded())
        else:
            raise _bad(f"cannot flatten node {node!r}", frames)


def flatten_text(symbol: GrammarSymbol, chooser: Chooser) -> str:
    """Run a flattening walk to completion and join the output."""
    return "".join(flatten(symbol, chooser))


def branch_options(node: Union[Choice, SamplerRequest]) -> tuple[BranchOption, ...]:
    """Annotated options of a choice node, built once and cached on it."""
    cached = node._labels
    if cached is not None:
        return cached
    recursive = recursive_names(node)
    options = []
    for index, branch in enumerate(node.branches):
        if isinstance(node, SamplerRequest):
            label = node.options[index][0]
        else:
            label = _label(branch)
        info = total_first(branch)
        refs = referenced_names(branch)
        options.append(
            BranchOption(
                index=index,
                label=label,
                first=info.chars,
                nullable=info.nullable,
                refs=refs,
                recursive=bool(_reachable_refs(branch) & recursive),
            )
        )
    node._labels = tuple(options)
    return node._labels


def _reachable_refs(branch: GrammarSymbol) -> frozenset[str]:
    from .analysis import _rule_closure

    return frozenset(nt.name for nt in _rule_closure(branch))


def _label(symbol: GrammarSymbol) -> str:
    if isinstance(symbol, Terminal):
        return repr(symbol.text)
    if isinstance(symbol, CharClass):
        return symbol.chars.preview()
    if isinstance(symbol, NonTerminal):
        return symbol.name
    if isinstance(symbol, Empty):
        return "''"
    if isinstance(symbol, Sequence):
        if symbol.items:
            return _label(symbol.items[0]) + " ..."
        return "''"
    if isinstance(symbol, (Choice, SamplerRequest)):
        return "(...)"
    if isinstance(symbol, Repeat):
        return _label(symbol.item) + "*"
    if isinstance(symbol, Join):
        return "join(...)"
    return repr(symbol)


def _ask(chooser: Chooser, request: Request, frames: list[str]) -> object:
    try:
        return chooser(request)
    except Exception as err:
        if getattr(err, "frames", None) is None:
            try:
                err.frames = tuple(frames)
            except AttributeError:
                pass
        raise


def _bad(message: str, frames: list[str]) -> BadAnswerError:
    err = BadAnswerError(message)
    err.frames = tuple(frames)
    return err
