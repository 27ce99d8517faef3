"""CharSet algebra against plain Python set semantics."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cfgen.charset import CharSet, EMPTY_SET, WHITESPACE

# small scalar alphabet keeps the brute-force mirror cheap
_scalar = st.integers(min_value=0x20, max_value=0x7F)
_range = st.tuples(_scalar, _scalar).map(lambda p: (min(p), max(p)))
_ranges = st.lists(_range, max_size=6)


def _mirror(ranges, excluded=()):
    out = set()
    for lo, hi in ranges:
        out.update(range(lo, hi + 1))
    out -= set(excluded)
    return out


def _members(cs: CharSet) -> set:
    return {ord(c) for c in cs}


class TestConstruction:
    def test_of_characters(self):
        cs = CharSet.of("a", "b", "z")
        assert "a" in cs and "b" in cs and "z" in cs
        assert "c" not in cs

    def test_ranges_normalized_sorted_disjoint(self):
        cs = CharSet([(0x41, 0x5A), (0x30, 0x39), (0x3A, 0x40)])
        lows = [lo for lo, _ in cs.ranges]
        assert lows == sorted(lows)
        for (alo, ahi), (blo, _) in zip(cs.ranges, cs.ranges[1:]):
            assert ahi + 1 < blo  # adjacent runs must have merged

    def test_adjacent_ranges_merge(self):
        cs = CharSet([(0x30, 0x34), (0x35, 0x39)])
        assert cs.ranges == ((0x30, 0x39),)

    def test_exclusions_apply(self):
        cs = CharSet([(0x30, 0x39)], excluded={0x35})
        assert "4" in cs and "6" in cs and "5" not in cs

    def test_surrogates_always_removed(self):
        cs = CharSet([(0xD000, 0xE000)])
        assert 0xD7FF in cs and 0xE000 in cs
        assert 0xD800 not in cs and 0xDFFF not in cs

    def test_empty(self):
        assert not EMPTY_SET
        assert len(EMPTY_SET) == 0
        assert list(EMPTY_SET) == []

    def test_whitespace_constant(self):
        assert _members(WHITESPACE) == {0x20, 0x09, 0x0A, 0x0D}


class TestAlgebra:
    @given(_ranges, _ranges)
    def test_union(self, a, b):
        assert _members(CharSet(a) | CharSet(b)) == _mirror(a) | _mirror(b)

    @given(_ranges, _ranges)
    def test_intersection(self, a, b):
        assert _members(CharSet(a) & CharSet(b)) == _mirror(a) & _mirror(b)

    @given(_ranges, _ranges)
    def test_subtract(self, a, b):
        assert _members(CharSet(a) - CharSet(b)) == _mirror(a) - _mirror(b)

    @given(_ranges, st.sets(_scalar, max_size=4))
    def test_exclusions_match_mirror(self, ranges, excluded):
        excluded = excluded & _mirror(ranges)  # only in-range cuts are legal
        assert _members(CharSet(ranges, excluded=excluded)) == _mirror(
            ranges, excluded
        )

    def test_exclusion_outside_ranges_rejected(self):
        with pytest.raises(ValueError):
            CharSet([(0x30, 0x39)], excluded={0x41})

    @given(_ranges)
    def test_iteration_sorted_unique(self, ranges):
        seq = [ord(c) for c in CharSet(ranges)]
        assert seq == sorted(set(seq))

    @given(_ranges)
    def test_len_matches_iteration(self, ranges):
        cs = CharSet(ranges)
        assert len(cs) == len(list(cs))

    @given(_ranges)
    def test_nth_enumerates_in_order(self, ranges):
        cs = CharSet(ranges)
        assert [cs.nth(i) for i in range(len(cs))] == [ord(c) for c in cs]

    def test_nth_out_of_range(self):
        with pytest.raises(IndexError):
            CharSet.of("a").nth(1)

    def test_contains_accepts_str_and_int(self):
        cs = CharSet.of("a")
        assert "a" in cs and 0x61 in cs
        assert "b" not in cs and 0x62 not in cs


class TestSerialization:
    @given(_ranges)
    def test_to_pairs_round_trip(self, ranges):
        cs = CharSet(ranges)
        again = CharSet([tuple(p) for p in cs.to_pairs()])
        assert _members(again) == _members(cs)

    def test_preview_truncates(self):
        wide = CharSet([(0x30, 0x39), (0x41, 0x5A), (0x61, 0x7A),
                        (0x21, 0x21), (0x23, 0x26)])
        text = wide.preview()
        assert "..." in text

    def test_preview_singleton(self):
        assert "a" in CharSet.of("a").preview()
