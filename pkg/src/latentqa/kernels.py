"""Kernel selection: compiled extension when available, pure Python otherwise.

Set LATENTQA_PURE=1 to force the fallback (used by the benchmark and by
tests that compare the two implementations).
"""

import os

if os.environ.get("LATENTQA_PURE"):
    from latentqa import _pure as _impl

    COMPILED = False
else:
    try:
        from latentqa import _speedups as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from latentqa import _pure as _impl

        COMPILED = False

lcs_length = _impl.lcs_length
rouge_span_f1 = _impl.rouge_span_f1
