"""Exception types shared across the engine, sampling, and token layers.

Kept in a plain module so the optionally compiled kernel and the pure one
raise the very same classes.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for derivation-engine failures."""


class ThreadCapError(EngineError):
    """Live speculative threads exceeded the configured cap."""

    def __init__(self, position: int, cap: int) -> None:
        self.position = position
        self.cap = cap
        super().__init__(
            f"thread cap {cap} exceeded at character position {position}: "
            "the grammar is too ambiguous here"
        )


class DeadSessionError(EngineError):
    """A mutating call reached a session frozen by a previous error."""


class KernelInvariantError(EngineError):
    """Internal invariant violation; indicates a bug, not a user error."""


class BadAnswerError(EngineError):
    """A chooser answered outside the offered range or set."""


class DepthExhaustedError(EngineError):
    """Generation hit the depth cap with only recursive branches left."""

    def __init__(self, names: tuple[str, ...]) -> None:
        self.names = tuple(names)
        cycle = ", ".join(self.names) or "<unnamed>"
        super().__init__(f"depth cap reached inside recursive rules: {cycle}")


class BudgetExhaustedError(EngineError):
    """Generation ran out of character budget; carries the valid prefix."""

    def __init__(self, prefix: str, budget: int) -> None:
        self.prefix = prefix
        self.budget = budget
        super().__init__(f"budget of {budget} characters exhausted")


class BackendError(EngineError):
    """A logits backend failed or was exhausted."""


class VocabError(EngineError):
    """A vocabulary file was malformed."""
