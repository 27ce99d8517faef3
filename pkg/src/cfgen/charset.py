"""Normalized sets of Unicode scalar values, stored as sorted inclusive ranges.

CharSet is the value type for expected-next-character sets and First sets.
Construction normalizes: ranges are merged, exclusions are cut out, and the
surrogate block U+D800-DFFF is always removed (surrogates are not scalar
values and cannot be serialized standalone).
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Iterable, Iterator, Union

Scalar = Union[int, str]

_SURROGATE_LO = 0xD800
_SURROGATE_HI = 0xDFFF


def _to_scalar(value: Scalar) -> int:
    if isinstance(value, str):
        if len(value) != 1:
            raise ValueError(f"expected a single character, got {value!r}")
        return ord(value)
    code = int(value)
    if not 0 <= code <= 0x10FFFF:
        raise ValueError(f"scalar out of range: {code:#x}")
    return code


def _normalize(pairs: list[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Sort, merge overlapping/adjacent ranges, and drop the surrogate block."""
    pairs.sort()
    merged: list[list[int]] = []
    for lo, hi in pairs:
        if merged and lo <= merged[-1][1] + 1:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    out: list[tuple[int, int]] = []
    for lo, hi in merged:
        # constraint: never emit scalars inside the surrogate block
        if hi < _SURROGATE_LO or lo > _SURROGATE_HI:
            out.append((lo, hi))
            continue
        if lo < _SURROGATE_LO:
            out.append((lo, _SURROGATE_LO - 1))
        if hi > _SURROGATE_HI:
            out.append((_SURROGATE_HI + 1, hi))
    return tuple(out)


class CharSet:
    """Immutable set of Unicode scalars held as disjoint sorted ranges."""

    __slots__ = ("ranges", "_starts", "_hash")

    def __init__(
        self,
        ranges: Iterable[tuple[Scalar, Scalar]] = (),
        excluded: Iterable[Scalar] = (),
    ) -> None:
        pairs: list[tuple[int, int]] = []
        for lo, hi in ranges:
            lo_s, hi_s = _to_scalar(lo), _to_scalar(hi)
            if lo_s > hi_s:
                raise ValueError(f"empty range {lo!r}..{hi!r}")
            pairs.append((lo_s, hi_s))
        normalized = _normalize(pairs)
        cut = sorted({_to_scalar(c) for c in excluded})
        if cut:
            normalized = _subtract_scalars(normalized, cut)
        self.ranges: tuple[tuple[int, int], ...] = normalized
        self._starts = [lo for lo, _ in normalized]
        self._hash = hash(normalized)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def of(cls, *chars: Scalar) -> "CharSet":
        return cls([(c, c) for c in chars])

    @classmethod
    def _wrap(cls, ranges: tuple[tuple[int, int], ...]) -> "CharSet":
        obj = cls.__new__(cls)
        obj.ranges = ranges
        obj._starts = [lo for lo, _ in ranges]
        obj._hash = hash(ranges)
        return obj

    # -- queries --------------------------------------------------------------

    def __contains__(self, value: Scalar) -> bool:
        code = _to_scalar(value)
        idx = bisect_right(self._starts, code) - 1
        return idx >= 0 and code <= self.ranges[idx][1]

    def __bool__(self) -> bool:
        return bool(self.ranges)

    def __len__(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.ranges)

    def __iter__(self) -> Iterator[str]:
        for lo, hi in self.ranges:
            for code in range(lo, hi + 1):
                yield chr(code)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CharSet) and self.ranges == other.ranges

    def __hash__(self) -> int:
        return self._hash

    def nth(self, index: int) -> int:
        """Scalar at position `index` in ascending order (for uniform draws)."""
        if index < 0:
            raise IndexError(index)
        for lo, hi in self.ranges:
            span = hi - lo + 1
            if index < span:
                return lo + index
            index -= span
        raise IndexError(index)

    # -- algebra --------------------------------------------------------------

    def union(self, other: "CharSet") -> "CharSet":
        if not other.ranges:
            return self
        if not self.ranges:
            return other
        return CharSet._wrap(_normalize(list(self.ranges) + list(other.ranges)))

    def intersection(self, other: "CharSet") -> "CharSet":
        out: list[tuple[int, int]] = []
        a, b = self.ranges, other.ranges
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return CharSet._wrap(tuple(out))

    def subtract(self, other: "CharSet") -> "CharSet":
        out: list[tuple[int, int]] = []
        for lo, hi in self.ranges:
            pieces = [(lo, hi)]
            for blo, bhi in other.ranges:
                if bhi < lo or blo > hi:
                    continue
                next_pieces: list[tuple[int, int]] = []
                for plo, phi in pieces:
                    if bhi < plo or blo > phi:
                        next_pieces.append((plo, phi))
                        continue
                    if plo < blo:
                        next_pieces.append((plo, blo - 1))
                    if phi > bhi:
                        next_pieces.append((bhi + 1, phi))
                pieces = next_pieces
            out.extend(pieces)
        return CharSet._wrap(_normalize(out))

    __or__ = union
    __and__ = intersection
    __sub__ = subtract

    # -- rendering ------------------------------------------------------------

    def preview(self, limit: int = 4) -> str:
        """Compact human-readable form, e.g. [0-9] or ["a" "c"]."""
        parts = []
        for lo, hi in self.ranges[:limit]:
            if lo == hi:
                parts.append(_show(lo))
            else:
                parts.append(f"{_show(lo)}-{_show(hi)}")
        if len(self.ranges) > limit:
            parts.append("...")
        return "[" + " ".join(parts) + "]"

    def to_pairs(self) -> list[list[int]]:
        return [[lo, hi] for lo, hi in self.ranges]

    def __repr__(self) -> str:
        return f"CharSet({self.preview()})"


def _subtract_scalars(
    ranges: tuple[tuple[int, int], ...], cut: list[int]
) -> tuple[tuple[int, int], ...]:
    covered = CharSet._wrap(ranges)
    for code in cut:
        if code not in covered:
            raise ValueError(
                f"excluded scalar {_show(code)} lies outside the ranges"
            )
    holes = CharSet._wrap(_normalize([(c, c) for c in cut]))
    return covered.subtract(holes).ranges


def _show(code: int) -> str:
    ch = chr(code)
    if ch.isprintable() and not ch.isspace():
        return ch
    return f"U+{code:04X}"


EMPTY_SET = CharSet()
WHITESPACE = CharSet.of(" ", "\t", "\n", "\r")
