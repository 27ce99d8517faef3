"""Command-line front end: generate, validate, expect, mask, experiments,
and the HTTP service launcher.

Exit codes: 0 success, 2 unknown or unloadable grammar, 3 generation
budget exhausted (the valid prefix goes to stderr).
"""

from __future__ import annotations

import argparse
import json as stdjson
import os
import sys

from .errors import BudgetExhaustedError
from .grammars import builtin_names, load_builtin, loads_grammar
from .session import Session
from .symbols import Grammar, GrammarError

EXIT_OK = 0
EXIT_BAD_GRAMMAR = 2
EXIT_BUDGET = 3


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except BudgetExhaustedError as err:
        print(f"budget exhausted; valid prefix: {err.prefix!r}", file=sys.stderr)
        return EXIT_BUDGET
    except GrammarError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_GRAMMAR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfgen",
        description="Grammar-guided generation and validation engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample members of a grammar")
    _grammar_flags(p)
    p.add_argument("--sampler", choices=["random", "adversarial"],
                   default="random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(handler=_cmd_generate)

    p = sub.add_parser("validate", help="verdict per input line")
    _grammar_flags(p)
    p.add_argument("--text", help="validate this string instead of stdin lines")
    p.add_argument("--significant", action="store_true",
                   help="skip pure-whitespace expectations in the rows")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("expect", help="expected next characters after a prefix")
    _grammar_flags(p)
    p.add_argument("--text", default="")
    p.add_argument("--significant", action="store_true")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(handler=_cmd_expect)

    p = sub.add_parser("mask", help="which vocabulary tokens may come next")
    _grammar_flags(p)
    p.add_argument("--vocab-file", required=True)
    p.add_argument("--text", default="")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(handler=_cmd_mask)

    p = sub.add_parser("experiment", help="run a reproducible experiment")
    exp = p.add_subparsers(dest="experiment", required=True)

    e = exp.add_parser("brackets", help="error rate vs bracket depth")
    e.add_argument("--backend", choices=["uniform", "biased-closer"],
                   default="biased-closer")
    e.add_argument("--max-n", type=int, default=40)
    e.add_argument("--language", choices=["english", "chinese"],
                   default="english")
    e.add_argument("--format", choices=["text", "json"], default="text")
    e.set_defaults(handler=_cmd_experiment_brackets)

    e = exp.add_parser("json-fuzz", help="random docs vs the reference parser")
    e.add_argument("--count", type=int, default=1000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--budget", type=int, default=4000)
    e.add_argument("--format", choices=["text", "json"], default="text")
    e.set_defaults(handler=_cmd_experiment_fuzz)

    e = exp.add_parser("sampling-ratio", help="sampler calls per character")
    e.add_argument("--count", type=int, default=1000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--budget", type=int, default=4000)
    e.add_argument("--format", choices=["text", "json"], default="text")
    e.set_defaults(handler=_cmd_experiment_ratio)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("CFGEN_PORT", "8080")))
    p.set_defaults(handler=_cmd_serve)

    return parser


def _grammar_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--grammar", default="json",
                       help=f"builtin name ({', '.join(builtin_names())})")
    group.add_argument("--grammar-file",
                       help="path to a grammar document (JSON)")


def _resolve_grammar(args) -> Grammar:
    if args.grammar_file:
        try:
            with open(args.grammar_file, encoding="utf-8") as handle:
                return loads_grammar(handle.read())
        except OSError as err:
            raise GrammarError(f"cannot read {args.grammar_file}: {err}")
        except ValueError as err:
            raise GrammarError(f"bad grammar document: {err}")
    return load_builtin(args.grammar)


# -- subcommands ----------------------------------------------------------


def _cmd_generate(args) -> int:
    from .sampling import (
        AdversarialChooser, RandomChooser, constrained_generate,
        generate_corpus, sampler_call_ratio,
    )

    grammar = _resolve_grammar(args)
    if args.count < 1:
        print("error: --count must be >= 1", file=sys.stderr)
        return 2
    if args.sampler == "random":
        results = generate_corpus(grammar, args.count, args.seed, args.budget)
    else:
        chooser = AdversarialChooser()
        results = [constrained_generate(grammar, chooser, args.budget)
                   for _ in range(args.count)]
    stats = [_stats_dict(r.stats) for r in results]
    if args.format == "json":
        print(stdjson.dumps({"outputs": [r.text for r in results],
                             "stats": stats}, ensure_ascii=False))
        return EXIT_OK
    for r in results:
        print(r.text)
    emitted = sum(s["chars_emitted"] for s in stats)
    calls = sum(s["sampler_calls"] for s in stats)
    forced = sum(s["forced_moves"] for s in stats)
    ratio = calls / emitted if emitted else 0.0
    print(f"-- {len(results)} outputs, {emitted} chars, {calls} sampler calls, "
          f"{forced} forced moves, ratio {ratio:.4f}", file=sys.stderr)
    return EXIT_OK


def _stats_dict(stats) -> dict:
    return {
        "chars_emitted": stats.chars_emitted,
        "sampler_calls": stats.sampler_calls,
        "forced_moves": stats.forced_moves,
    }


def _cmd_validate(args) -> int:
    grammar = _resolve_grammar(args)
    inputs = [args.text] if args.text is not None else None
    if inputs is None:
        inputs = (line.rstrip("\n") for line in sys.stdin)
    for text in inputs:
        verdict = _validate_one(grammar, text, args.significant)
        if args.format == "json":
            print(stdjson.dumps(verdict, ensure_ascii=False), flush=True)
        else:
            _print_verdict(text, verdict)
    return EXIT_OK


def _validate_one(grammar: Grammar, text: str, significant: bool) -> dict:
    session = Session.start(grammar)
    for index, ch in enumerate(text):
        result = session.feed(ch)
        from .session import Error

        if isinstance(result, Error):
            expected = result.expected
            if significant:
                from .charset import WHITESPACE

                expected = expected - WHITESPACE
            return {
                "verdict": "error",
                "position": result.position,
                "found": result.found,
                "expected": expected.to_pairs(),
                "end": result.end_allowed,
            }
    if session.accepting:
        return {"verdict": "member"}
    expected = session.expected_next(significant_only=significant)
    return {"verdict": "prefix", "expected": expected.to_pairs(),
            "end": False}


def _print_verdict(text: str, verdict: dict) -> None:
    kind = verdict["verdict"]
    if kind == "member":
        print(f"{text!r}: member")
        return
    if kind == "prefix":
        print(f"{text!r}: prefix")
    else:
        print(f"{text!r}: error at position {verdict['position']} "
              f"(found {verdict['found']!r})")
    _print_rows(verdict["expected"], verdict["end"])


def _print_rows(pairs, end_allowed: bool) -> None:
    print("  value\ttype")
    for lo, hi in pairs:
        if lo == hi:
            print(f"  {_show_char(lo)}\tChar")
        else:
            print(f"  {_show_char(lo)}-{_show_char(hi)}\tRange")
    if end_allowed:
        print("  end\t")


def _show_char(code: int) -> str:
    ch = chr(code)
    if ch.isprintable() and not ch.isspace():
        return ch
    return f"U+{code:04X}"


def _cmd_expect(args) -> int:
    grammar = _resolve_grammar(args)
    session = Session.start(grammar)
    from .session import Error

    for ch in args.text:
        result = session.feed(ch)
        if isinstance(result, Error):
            print(f"error: input rejected at position {result.position} "
                  f"(found {result.found!r})", file=sys.stderr)
            return EXIT_OK
    expected = session.expected_next(significant_only=args.significant)
    if args.format == "json":
        print(stdjson.dumps({"expected": expected.to_pairs(),
                             "accepting": session.accepting,
                             "position": session.position},
                            ensure_ascii=False))
        return EXIT_OK
    _print_rows(expected.to_pairs(), session.accepting)
    return EXIT_OK


def _cmd_mask(args) -> int:
    from .tokens import load_vocab, token_mask

    grammar = _resolve_grammar(args)
    try:
        vocab = load_vocab(args.vocab_file)
    except OSError as err:
        print(f"error: cannot read vocabulary: {err}", file=sys.stderr)
        return 2
    session = Session.start(grammar)
    from .session import Error

    for ch in args.text:
        if isinstance(session.feed(ch), Error):
            print("error: text is not a valid prefix", file=sys.stderr)
            return EXIT_OK
    mask = token_mask(session, vocab)
    if args.format == "json":
        print(stdjson.dumps({"mask": [bool(b) for b in mask],
                             "allowed": [int(i) for i in mask.nonzero()[0]],
                             "eos_id": vocab.eos_id}, ensure_ascii=False))
        return EXIT_OK
    for token_id in mask.nonzero()[0]:
        token = vocab.texts[int(token_id)]
        if token is None:
            print(f"{int(token_id)}\t!EOS")
        else:
            print(f"{int(token_id)}\t{token!r}")
    return EXIT_OK


def _cmd_experiment_brackets(args) -> int:
    from .experiments import bracket_depth
    from .sampling import mock_backend
    from .tokens import make_vocab

    vocab = make_vocab(["(", ")"])
    backend = mock_backend(args.backend, vocab.size, token_text=vocab.texts)
    report = bracket_depth(backend, vocab, range(1, args.max_n + 1),
                           language=args.language)
    return _emit_report(report, args.format)


def _cmd_experiment_fuzz(args) -> int:
    from .experiments import json_fuzz

    report = json_fuzz(args.count, args.seed, budget=args.budget)
    code = _emit_report(report, args.format)
    if report.summary["success_rate"] < 1.0:
        return 1
    return code


def _cmd_experiment_ratio(args) -> int:
    from .experiments import sampling_ratio

    report = sampling_ratio(args.count, args.seed, budget=args.budget)
    return _emit_report(report, args.format)


def _emit_report(report, fmt: str) -> int:
    if fmt == "json":
        sys.stdout.write(report.to_json())
        return EXIT_OK
    print(f"experiment: {report.name}")
    for key, value in report.parameters.items():
        print(f"  {key}: {value}")
    for point in report.points:
        print("  " + "  ".join(f"{k}={v}" for k, v in point.items()))
    print("summary:")
    for key, value in report.summary.items():
        if key == "failures" and value:
            print(f"  failures: {len(value)} (first: {value[0]})")
        else:
            print(f"  {key}: {value}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
