# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the span-matching inner loop.

Semantics match latentqa._pure exactly; see that module for the contract.
"""

import numpy as np


def lcs_length(a, b):
    cdef long[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef long[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t n = av.shape[0], m = bv.shape[0]
    if n == 0 or m == 0:
        return 0
    buf = np.zeros((2, m + 1), dtype=np.int64)
    cdef long[:, ::1] dp = buf
    cdef Py_ssize_t i, j, cur = 0, prev = 1
    cdef long x
    for i in range(n):
        cur, prev = prev, cur
        x = av[i]
        for j in range(1, m + 1):
            if bv[j - 1] == x:
                dp[cur, j] = dp[prev, j - 1] + 1
            elif dp[cur, j - 1] >= dp[prev, j]:
                dp[cur, j] = dp[cur, j - 1]
            else:
                dp[cur, j] = dp[prev, j]
    return int(dp[cur, m])


def rouge_span_f1(ids, ref, int max_span_len, out):
    cdef long[::1] iv = np.ascontiguousarray(ids, dtype=np.int64)
    cdef long[::1] rv = np.ascontiguousarray(ref, dtype=np.int64)
    cdef double[::1] ov = out
    cdef Py_ssize_t L = iv.shape[0], R = rv.shape[0]
    buf = np.zeros((2, R + 1), dtype=np.int64)
    cdef long[:, ::1] dp = buf
    cdef Py_ssize_t s, e, j, stop, pos = 0, cur, prev
    cdef long t, lcs, clen
    for s in range(L):
        for j in range(R + 1):
            dp[0, j] = 0
            dp[1, j] = 0
        cur = 0
        prev = 1
        clen = 0
        stop = s + max_span_len
        if stop > L:
            stop = L
        for e in range(s, stop):
            t = iv[e]
            if t >= 0:
                cur, prev = prev, cur
                for j in range(1, R + 1):
                    if rv[j - 1] == t:
                        dp[cur, j] = dp[prev, j - 1] + 1
                    elif dp[cur, j - 1] >= dp[prev, j]:
                        dp[cur, j] = dp[cur, j - 1]
                    else:
                        dp[cur, j] = dp[prev, j]
                clen += 1
            lcs = dp[cur, R] if R > 0 else 0
            if clen > 0 and lcs > 0:
                ov[pos] = 2.0 * lcs / (clen + R)
            else:
                ov[pos] = 0.0
            pos += 1
