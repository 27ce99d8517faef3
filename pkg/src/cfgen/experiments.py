"""Reproducible experiments: bracket-depth error curves, JSON fuzzing,
and sampler-call ratio measurement.

Each experiment returns an ExperimentReport that serializes to JSON, so
the CLI can emit either a readable table or machine-readable output.
"""

from __future__ import annotations

import json as stdjson
from dataclasses import dataclass, field

import numpy as np

from .errors import BackendError, BudgetExhaustedError
from .grammars import json_grammar
from .sampling import generate_corpus, sampler_call_ratio, temperature_scale
from .tokens import Vocab

BRACKET_PROMPTS = {
    "english": (
        "Given a string containing only (,). A valid bracket pair string "
        "must satisfy: 1. The right side of each left bracket has a unique "
        "corresponding right bracket that matches it. 2. Left brackets in "
        "different positions match right brackets in different positions. "
        "A valid bracket pair string: ```"
    ),
    "chinese": (
        "给定一个仅包含 (,) 的字符"
        "串。 有效的括号对字符串"
        "必须满足： 1. 每个左括号"
        "的右侧都有一个与之匹配"
        "的唯一对应的右括号。 2. "
        "不同位置的左括号与不同"
        "位置的右括号相匹配。 "
        "有效的括号对字符串： ```"
    ),
}


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    points: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "parameters": self.parameters,
            "points": self.points,
            "summary": self.summary,
        }
        return stdjson.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def bracket_depth(
    backend,
    vocab: Vocab,
    ns,
    *,
    language: str = "english",
    temperature: float = 1.0,
) -> ExperimentReport:
    """Error rate of a next-token backend on balanced bracket contexts.

    For each n the context is the bracket prompt, a newline, then n opens
    followed by n closes. The string is already balanced, so restricted to
    the two bracket characters, the probability mass the backend puts on
    ')' is exactly its error rate. Backend failures are recorded per point
    and skipped.
    """
    if language not in BRACKET_PROMPTS:
        raise ValueError(f"unknown prompt language {language!r}")
    try:
        open_id = vocab.texts.index("(")
        close_id = vocab.texts.index(")")
    except ValueError:
        raise ValueError("vocabulary must contain '(' and ')' tokens") from None
    prompt = BRACKET_PROMPTS[language]
    report = ExperimentReport(
        "bracket-depth",
        {"language": language, "ns": list(ns), "temperature": temperature},
    )
    first_50 = first_95 = None
    for n in ns:
        context = prompt + "\n" + "(" * n + ")" * n
        try:
            logits = np.asarray(backend(context), dtype=float)
        except BackendError as err:
            report.points.append({"n": n, "s_len": 2 * n, "failed": str(err)})
            continue
        pair = temperature_scale(
            np.array([logits[open_id], logits[close_id]]), temperature
        )
        rate = float(pair[1])
        report.points.append({"n": n, "s_len": 2 * n, "error_rate": rate})
        if first_50 is None and rate > 0.5:
            first_50 = n
        if first_95 is None and rate > 0.95:
            first_95 = n
    report.summary = {
        "first_n_over_50": first_50,
        "first_n_over_95": first_95,
        "first_s_len_over_50": None if first_50 is None else 2 * first_50,
        "first_s_len_over_95": None if first_95 is None else 2 * first_95,
    }
    return report


def json_fuzz(count: int, seed: int, *, budget: int = 4000) -> ExperimentReport:
    """Generate random JSON documents and check every one against the
    stdlib parser, including a parse -> dump -> parse round trip."""
    if count < 1:
        raise ValueError("count must be >= 1")
    grammar = json_grammar()
    report = ExperimentReport("json-fuzz", {"count": count, "seed": seed,
                                            "budget": budget})
    failures = []
    lengths = []
    successes = 0
    chooser_corpus = _fuzz_corpus(grammar, count, seed, budget, failures)
    for index, text in chooser_corpus:
        lengths.append(len(text))
        try:
            parsed = stdjson.loads(text)
            again = stdjson.loads(stdjson.dumps(parsed))
        except Exception as err:
            failures.append({"index": index, "text": text, "error": str(err)})
            continue
        if again != parsed:
            failures.append({"index": index, "text": text,
                             "error": "round trip changed the value"})
            continue
        successes += 1
    total = count
    report.summary = {
        "count": total,
        "successes": successes,
        "success_rate": successes / total,
        "mean_len": (sum(lengths) / len(lengths)) if lengths else 0.0,
        "max_len": max(lengths) if lengths else 0,
        "failures": failures,
    }
    return report


def _fuzz_corpus(grammar, count, seed, budget, failures):
    from .sampling import RandomChooser, constrained_generate

    chooser = RandomChooser(seed)
    out = []
    for index in range(count):
        try:
            result = constrained_generate(grammar, chooser, budget)
        except BudgetExhaustedError as err:
            failures.append({"index": index, "text": err.prefix,
                             "error": "budget exhausted"})
            continue
        out.append((index, result.text))
    return out


def sampling_ratio(count: int, seed: int, *, budget: int = 4000) -> ExperimentReport:
    """Sampler calls per character with the forced-move shortcut on and
    off, over the same random JSON corpus, bucketed by document length."""
    if count < 1:
        raise ValueError("count must be >= 1")
    grammar = json_grammar()
    on = generate_corpus(grammar, count, seed, budget)
    off = generate_corpus(grammar, count, seed, budget, shortcut=False)
    report = ExperimentReport("sampling-ratio", {"count": count, "seed": seed,
                                                 "budget": budget})
    buckets: dict[str, dict] = {}
    literals = {"true", "false", "null"}
    literal_ratios = []
    ratios_on = []
    ratios_off = []
    for a, b in zip(on, off):
        if a.text != b.text:
            raise AssertionError(
                "shortcut changed the sampled document; the two modes must "
                "share one trajectory"
            )
        r_on = sampler_call_ratio(a.stats)
        r_off = sampler_call_ratio(b.stats)
        ratios_on.append(r_on)
        ratios_off.append(r_off)
        if a.text in literals:
            literal_ratios.append(r_on)
        bucket = _length_bucket(len(a.text))
        slot = buckets.setdefault(bucket, {"count": 0, "on": 0.0, "off": 0.0})
        slot["count"] += 1
        slot["on"] += r_on
        slot["off"] += r_off
    for label, slot in buckets.items():
        report.points.append({
            "bucket": label,
            "count": slot["count"],
            "mean_ratio_on": slot["on"] / slot["count"],
            "mean_ratio_off": slot["off"] / slot["count"],
        })
    report.points.sort(key=lambda p: int(p["bucket"].split("-")[0]))
    report.summary = {
        "mean_ratio_on": sum(ratios_on) / len(ratios_on),
        "mean_ratio_off": sum(ratios_off) / len(ratios_off),
        "literal_count": len(literal_ratios),
        "literal_mean_ratio": (
            sum(literal_ratios) / len(literal_ratios) if literal_ratios else None
        ),
    }
    return report


def _length_bucket(length: int) -> str:
    lo = 1
    while lo * 2 <= length:
        lo *= 2
    return f"{lo}-{lo * 2 - 1}"
