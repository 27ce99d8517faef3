"""Generation walks: decision requests, scripted replay, answer checking."""

from __future__ import annotations

import pytest

from cfgen.errors import BadAnswerError
from cfgen.flatten import (
    BranchRequest,
    CountRequest,
    ScalarRequest,
    branch_options,
    flatten,
    flatten_text,
)
from cfgen.grammars import load_builtin
from cfgen.session import is_member
from cfgen.symbols import (
    NonTerminal,
    Sequence,
    Repeat,
    SamplerRequest,
    accept,
    join,
    optional,
    select,
)


class _Script:
    """Replay canned answers and record every request seen."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.seen = []

    def __call__(self, request):
        self.seen.append(request)
        return self.answers.pop(0)


class TestRequests:
    def test_literals_stream_without_requests(self):
        chooser = _Script([])
        symbol = Sequence(("hello", " ", "world"))
        assert flatten_text(symbol, chooser) == "hello world"
        assert chooser.seen == []

    def test_choice_raises_branch_request(self):
        chooser = _Script([1])
        assert flatten_text(select("a", "b", "c"), chooser) == "b"
        [request] = chooser.seen
        assert isinstance(request, BranchRequest)
        assert [o.label for o in request.options] == ["'a'", "'b'", "'c'"]

    def test_charclass_raises_scalar_request(self):
        chooser = _Script(["q"])
        assert flatten_text(accept(("a", "z")), chooser) == "q"
        [request] = chooser.seen
        assert isinstance(request, ScalarRequest)
        assert "q" in request.chars

    def test_count_request_only_for_ranges(self):
        chooser = _Script([3])
        assert flatten_text(Repeat("ab", (1, 5)), chooser) == "ababab"
        [request] = chooser.seen
        assert isinstance(request, CountRequest)
        assert (request.lo, request.hi) == (1, 5)

    def test_fixed_count_never_asks(self):
        chooser = _Script([])
        assert flatten_text(Repeat("xy", 3), chooser) == "xyxyxy"
        assert chooser.seen == []

    def test_frames_name_enclosing_rules(self):
        inner = NonTerminal("inner", select("a", "b"))
        outer = NonTerminal("outer", ("<", inner, ">"))
        chooser = _Script([0])
        assert flatten_text(outer, chooser) == "<a>"
        [request] = chooser.seen
        assert request.frames == ("outer", "inner")

    def test_sampler_request_keeps_labels_and_tag(self):
        node = SamplerRequest([("yes", "y"), ("no", "n")], tag="confirm")
        chooser = _Script([1])
        assert flatten_text(node, chooser) == "n"
        [request] = chooser.seen
        assert request.tag == "confirm"
        assert [o.label for o in request.options] == ["yes", "no"]


class TestAnswerChecking:
    def test_branch_out_of_range(self):
        with pytest.raises(BadAnswerError, match="outside 0..1"):
            flatten_text(select("a", "b"), _Script([5]))

    def test_branch_wrong_type(self):
        with pytest.raises(BadAnswerError):
            flatten_text(select("a", "b"), _Script(["a"]))

    def test_scalar_outside_class(self):
        with pytest.raises(BadAnswerError, match="not in"):
            flatten_text(accept(("0", "9")), _Script(["x"]))

    def test_scalar_must_be_single_char(self):
        with pytest.raises(BadAnswerError):
            flatten_text(accept(("0", "9")), _Script(["12"]))

    def test_count_outside_range(self):
        with pytest.raises(BadAnswerError, match="outside 2..4"):
            flatten_text(Repeat("a", (2, 4)), _Script([7]))

    def test_error_carries_frames(self):
        rule = NonTerminal("rule", select("a", "b"))
        with pytest.raises(BadAnswerError) as err:
            flatten_text(rule, _Script([9]))
        assert err.value.frames == ("rule",)


class TestBranchOptions:
    def test_annotations_on_json_value(self):
        grammar = load_builtin("json")
        value = grammar.rule("value").resolve()
        options = branch_options(value)
        by_label = {o.label: o for o in options}
        assert by_label["object"].recursive
        assert by_label["array"].recursive
        assert not by_label["boolean"].recursive
        assert "{" in by_label["object"].first
        assert "[" in by_label["array"].first

    def test_nullable_annotation(self):
        options = branch_options(optional("x"))
        assert options[0].nullable and not options[1].nullable

    def test_options_cached(self):
        node = select("a", "b")
        assert branch_options(node) is branch_options(node)


class TestWalks:
    def test_streaming_is_incremental(self):
        answers = iter([0, 1, 0])

        def chooser(request):
            return next(answers)

        stream = flatten(join(",", Repeat(select("a", "b"), (1, 3))), chooser)
        assert next(stream) == "a"  # first item appears before later answers

    def test_completed_walks_are_members(self):
        grammar = load_builtin("json")

        def smallest(request):
            if isinstance(request, BranchRequest):
                # prefer non-recursive branches so the walk terminates
                for option in request.options:
                    if not option.recursive:
                        return option.index
                return 0
            if isinstance(request, ScalarRequest):
                return chr(request.chars.nth(0))
            return request.lo

        text = flatten_text(grammar.start, smallest)
        assert is_member(grammar, text)
