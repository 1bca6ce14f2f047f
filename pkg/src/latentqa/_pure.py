"""Pure-Python kernels; the compiled module in _speedups.pyx mirrors these.

Both implementations share one contract:

* token ids are non-negative ints, -1 marks a token that normalized to
  nothing and is skipped,
* span layout is (s, e) for s in [0, L) and e in [s, min(s+max_span_len, L)),
* the F1 written per span is 2*LCS / (len(candidate) + len(reference)).
"""

from __future__ import annotations


def lcs_length(a, b) -> int:
    """Longest common subsequence length between two id sequences."""
    a = list(a)
    b = list(b)
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
        prev = cur
    return prev[-1]


def rouge_span_f1(ids, ref, max_span_len: int, out) -> None:
    """Fill ``out`` with the LCS-F1 of every document span against ``ref``.

    For a fixed start the DP row is extended one candidate token at a time,
    so the whole scan costs O(L * max_span_len * |ref|).
    """
    ids = list(ids)
    ref = list(ref)
    L = len(ids)
    R = len(ref)
    pos = 0
    for s in range(L):
        prev = [0] * (R + 1)
        clen = 0
        for e in range(s, min(s + max_span_len, L)):
            t = ids[e]
            if t >= 0:
                cur = [0] * (R + 1)
                for j in range(1, R + 1):
                    if ref[j - 1] == t:
                        cur[j] = prev[j - 1] + 1
                    else:
                        cur[j] = cur[j - 1] if cur[j - 1] >= prev[j] else prev[j]
                prev = cur
                clen += 1
            lcs = prev[R] if R else 0
            out[pos] = 2.0 * lcs / (clen + R) if clen and lcs else 0.0
            pos += 1
