#!/usr/bin/env python3
"""Benchmark the compiled span-matching kernels against the pure fallback.

The ROUGE-L span scan dominates solution-set precompute for long documents,
so this times the raw kernels on synthetic inputs and an end-to-end
find_matching_spans pass with each implementation swapped in.

Usage: python benchmarks/bench_kernels.py [--doc-len N] [--repeats K]
"""

import argparse
import time

import numpy as np

from latentqa import _pure, kernels, span_match
from latentqa.core import Document, Token
from latentqa.span_match import Matcher, MatchKind, find_matching_spans

try:
    from latentqa import _speedups
except ImportError:
    _speedups = None


def _timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def synthetic_doc(length, seed=0):
    rng = np.random.default_rng(seed)
    words = [f"w{rng.integers(0, 200)}" for _ in range(length)]
    for p in range(10, length - 2, max(10, length // 12)):
        words[p], words[p + 1] = "alpha", "beta"
    offset = 0
    tokens = []
    for w in words:
        tokens.append(Token(w, offset))
        offset += len(w) + 1
    return Document(tuple(tokens))


def bench_lcs(repeats):
    rng = np.random.default_rng(1)
    a = rng.integers(0, 50, size=400).astype(np.int64)
    b = rng.integers(0, 50, size=400).astype(np.int64)
    rows = []
    if _speedups is not None:
        rows.append(("lcs_length 400x400", "compiled", _timeit(lambda: _speedups.lcs_length(a, b), repeats)))
    rows.append(("lcs_length 400x400", "pure", _timeit(lambda: _pure.lcs_length(a, b), repeats)))
    return rows


def bench_span_scan(doc_len, repeats):
    rng = np.random.default_rng(2)
    ids = rng.integers(0, 60, size=doc_len).astype(np.int64)
    ids[rng.random(doc_len) < 0.1] = -1
    ref = rng.integers(0, 60, size=4).astype(np.int64)
    max_len = 10
    n = span_match.count_spans(doc_len, max_len)
    out = np.zeros(n)
    rows = []
    if _speedups is not None:
        rows.append((
            f"rouge_span_f1 L={doc_len}",
            "compiled",
            _timeit(lambda: _speedups.rouge_span_f1(ids, ref, max_len, out), repeats),
        ))
    rows.append((
        f"rouge_span_f1 L={doc_len}",
        "pure",
        _timeit(lambda: _pure.rouge_span_f1(ids, ref, max_len, out), repeats),
    ))
    return rows


def bench_end_to_end(doc_len, repeats):
    doc = synthetic_doc(doc_len)
    matcher = Matcher(MatchKind.ROUGE_L, max_span_len=10)
    answers = ("alpha beta", "alpha beta w7")
    rows = []
    impls = [("pure", _pure)]
    if _speedups is not None:
        impls.insert(0, ("compiled", _speedups))
    original = kernels.rouge_span_f1
    try:
        for label, impl in impls:
            kernels.rouge_span_f1 = impl.rouge_span_f1
            rows.append((
                f"find_matching_spans L={doc_len}",
                label,
                _timeit(lambda: find_matching_spans(doc, answers, matcher), repeats),
            ))
    finally:
        kernels.rouge_span_f1 = original
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--doc-len", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled extension not available; timing the pure kernels only\n")

    rows = []
    rows += bench_lcs(args.repeats)
    rows += bench_span_scan(args.doc_len, args.repeats)
    rows += bench_end_to_end(args.doc_len, args.repeats)

    print(f"{'benchmark':<28} {'impl':<9} {'best of ' + str(args.repeats):>12}")
    print("-" * 52)
    by_name = {}
    for name, impl, secs in rows:
        print(f"{name:<28} {impl:<9} {secs * 1e3:>9.2f} ms")
        by_name.setdefault(name, {})[impl] = secs
    print()
    for name, impls in by_name.items():
        if "compiled" in impls and "pure" in impls:
            print(f"{name}: compiled is {impls['pure'] / impls['compiled']:.1f}x faster")


if __name__ == "__main__":
    main()
