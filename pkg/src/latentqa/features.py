"""Hand-crafted token and candidate features backing the trainable scorers.

These fixed features stand in for learned encoders: question-overlap flags
in a small window, a numeric flag, relative-position buckets, and stable
hash bits of nearby tokens.  Everything is deterministic across runs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from latentqa.core import Document, Example, Token, normalize_text, parse_number

_N_POS_BUCKETS = 8
_N_HASH_BITS = 4


def _hash_bits(text: str | None) -> tuple[int, ...]:
    if text is None:
        return (0,) * _N_HASH_BITS
    h = hashlib.md5(text.lower().encode("utf8")).digest()[0]
    return tuple((h >> i) & 1 for i in range(_N_HASH_BITS))


def _default_segment_features(
    tokens: Sequence[Token], question_vocab: frozenset[str], question_focus: str
) -> np.ndarray:
    n = len(tokens)
    dim = 12 + _N_POS_BUCKETS + 4 * _N_HASH_BITS
    out = np.zeros((n, dim), dtype=np.float64)
    texts = [t.text for t in tokens]
    norm = [normalize_text(t) for t in texts]
    in_q = [t in question_vocab for t in norm]
    # overlap with the question's final token, the usual focus word
    is_focus = [bool(t) and t == question_focus for t in norm]
    for j in range(n):
        out[j, 0] = 1.0
        out[j, 1] = in_q[j]
        out[j, 2] = in_q[j - 1] if j >= 1 else 0.0
        out[j, 3] = in_q[j - 2] if j >= 2 else 0.0
        out[j, 4] = in_q[j + 1] if j + 1 < n else 0.0
        out[j, 5] = in_q[j + 2] if j + 2 < n else 0.0
        out[j, 6] = is_focus[j]
        out[j, 7] = is_focus[j - 1] if j >= 1 else 0.0
        out[j, 8] = is_focus[j - 2] if j >= 2 else 0.0
        out[j, 9] = is_focus[j + 1] if j + 1 < n else 0.0
        out[j, 10] = is_focus[j + 2] if j + 2 < n else 0.0
        out[j, 11] = parse_number(texts[j]) is not None
        bucket = min(_N_POS_BUCKETS * j // max(n, 1), _N_POS_BUCKETS - 1)
        out[j, 12 + bucket] = 1.0
        base = 12 + _N_POS_BUCKETS
        for off, other in enumerate(
            (texts[j], texts[j - 1] if j >= 1 else None,
             texts[j - 2] if j >= 2 else None,
             texts[j + 1] if j + 1 < n else None)
        ):
            out[j, base + off * _N_HASH_BITS : base + (off + 1) * _N_HASH_BITS] = _hash_bits(other)
    return out


_POSITION_CAP = 32


def _position_segment_features(
    tokens: Sequence[Token], question_vocab: frozenset[str], question_focus: str
) -> np.ndarray:
    """Bias plus a one-hot of the (capped) token position; used by tests that
    need direct control over per-position scores."""
    n = len(tokens)
    out = np.zeros((n, 1 + _POSITION_CAP), dtype=np.float64)
    out[:, 0] = 1.0
    for j in range(n):
        out[j, 1 + min(j, _POSITION_CAP - 1)] = 1.0
    return out


@dataclass(frozen=True)
class TokenFeatureSet:
    name: str
    dim: int
    segment_fn: Callable[[Sequence[Token], frozenset[str], str], np.ndarray]


TOKEN_FEATURE_SETS = {
    "default": TokenFeatureSet("default", 12 + _N_POS_BUCKETS + 4 * _N_HASH_BITS, _default_segment_features),
    "position": TokenFeatureSet("position", 1 + _POSITION_CAP, _position_segment_features),
}


def token_feature_dim(feature_set: str) -> int:
    return TOKEN_FEATURE_SETS[feature_set].dim


@lru_cache(maxsize=None)
def sequence_features(example: Example, feature_set: str = "default") -> tuple[np.ndarray, int]:
    """Features for the example's token sequence (question, then document).

    Returns the matrix and the offset of the document segment; for table
    contexts only the question segment exists.
    """
    fs = TOKEN_FEATURE_SETS[feature_set]
    vocab = frozenset(
        n for n in (normalize_text(t.text) for t in example.question) if n
    )
    focus = normalize_text(example.question[-1].text)
    q_feats = fs.segment_fn(example.question, vocab, focus)
    if isinstance(example.context, Document):
        d_feats = fs.segment_fn(example.context.tokens, vocab, focus)
        full = np.vstack([q_feats, d_feats])
    else:
        full = q_feats
    full.setflags(write=False)
    return full, len(example.question)


def document_features(example: Example, feature_set: str = "default") -> np.ndarray:
    full, offset = sequence_features(example, feature_set)
    return full[offset:]
