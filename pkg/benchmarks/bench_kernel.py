"""Compare the compiled derivation kernel against the pure-Python fallback.

Runs the same four workloads under each backend in a subprocess (the kernel
is chosen at import time, so each measurement needs a fresh interpreter)
and prints a speedup table:

    python3 benchmarks/bench_kernel.py
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _workloads():
    from cfgen.grammars import load_builtin
    from cfgen.sampling import generate_corpus
    from cfgen.session import Session, is_member

    json_grammar = load_builtin("json")
    brackets = load_builtin("brackets")

    def bench_generate():
        results = generate_corpus(json_grammar, 300, 0, 4000)
        return sum(r.stats.chars_emitted for r in results)

    docs = [r.text for r in generate_corpus(json_grammar, 300, 0, 4000)]

    def bench_validate():
        return sum(1 for d in docs if is_member(json_grammar, d))

    prefixes = ['{ "key": 0', '[[1, 2], {"a": "b"}', '{"x": [true, null',
                '-12.5e', '{"deep": {"er": {"est": [']

    def bench_expected():
        total = 0
        for _ in range(40):
            for prefix in prefixes:
                session = Session.start(json_grammar)
                session.feed_text(prefix)
                total += len(session.expected_next(significant_only=True))
        return total

    def bench_brackets():
        count = 0
        for length in range(1, 12):
            for bits in range(1 << length):
                text = "".join(
                    "(" if (bits >> i) & 1 else ")" for i in range(length)
                )
                count += is_member(brackets, text)
        return count

    return [
        ("generate 300 json docs", bench_generate),
        ("validate 300 json docs", bench_validate),
        ("expected-set queries", bench_expected),
        ("bracket strings <= 11", bench_brackets),
    ]


def run_worker() -> None:
    import cfgen

    timings = {"backend": cfgen.kernel_backend()}
    for name, fn in _workloads():
        start = time.perf_counter()
        check = fn()
        timings[name] = time.perf_counter() - start
        timings.setdefault("checks", {})[name] = check
    print(json.dumps(timings))


def run_harness() -> int:
    here = os.path.abspath(__file__)
    rows = {}
    for label, env_value in (("compiled", None), ("pure", "1")):
        env = dict(os.environ)
        env.pop("CFGEN_PURE_KERNEL", None)
        if env_value:
            env["CFGEN_PURE_KERNEL"] = env_value
        out = subprocess.run(
            [sys.executable, here, "--worker"],
            env=env, capture_output=True, text=True, check=True,
        )
        rows[label] = json.loads(out.stdout)
        if rows[label]["backend"] != label:
            print(f"note: requested {label} kernel, got "
                  f"{rows[label]['backend']} (extension not built?)")

    if rows["compiled"]["checks"] != rows["pure"]["checks"]:
        print("MISMATCH: backends disagree on workload results")
        return 1

    names = [k for k in rows["compiled"] if k not in ("backend", "checks")]
    width = max(len(n) for n in names)
    print(f"{'workload':<{width}}  {'pure':>8}  {'compiled':>8}  speedup")
    for name in names:
        pure = rows["pure"][name]
        comp = rows["compiled"][name]
        print(f"{name:<{width}}  {pure:>7.3f}s  {comp:>7.3f}s  "
              f"{pure / comp:>6.2f}x")
    return 0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--worker", action="store_true",
                        help="run one backend and emit JSON timings")
    args = parser.parse_args()
    if args.worker:
        run_worker()
        return 0
    return run_harness()


if __name__ == "__main__":
    sys.exit(main())
