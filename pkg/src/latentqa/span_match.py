"""Solution sets for multi-mention reading comprehension.

Every document span up to a length bound is scored against the gold answer
with a string-match function (exact match or ROUGE-L); the solution set
keeps all spans attaining the best score.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from latentqa import kernels
from latentqa.core import Document, SolutionSet, normalize_text


class MatchKind(Enum):
    EXACT = "exact"
    ROUGE_L = "rouge"


@dataclass(frozen=True)
class Matcher:
    """Matching configuration: score function, span-length bound, noise rank."""

    kind: MatchKind = MatchKind.EXACT
    max_span_len: int = 10
    noisy_rank_k: int | None = None

    def __post_init__(self):
        if self.max_span_len < 1:
            raise ValueError("max_span_len must be >= 1")
        if self.noisy_rank_k is not None and self.noisy_rank_k < 1:
            raise ValueError("noisy_rank_k must be >= 1 when present")


@dataclass(frozen=True)
class Span:
    """Inclusive token-index span (0-based) in a document."""

    s: int
    e: int

    def __post_init__(self):
        if not 0 <= self.s <= self.e:
            raise ValueError(f"invalid span ({self.s}, {self.e})")

    def sort_key(self):
        return (self.s, self.e)


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """LCS-based F1 between two token sequences.

    F1 = 2PR/(P+R) with P = LCS/|candidate| and R = LCS/|reference|; zero
    whenever either side is empty or nothing is shared.
    """
    if not candidate or not reference:
        return 0.0
    vocab: dict[str, int] = {}
    a = np.array([vocab.setdefault(t, len(vocab)) for t in candidate], dtype=np.int64)
    b = np.array([vocab.setdefault(t, len(vocab)) for t in reference], dtype=np.int64)
    lcs = kernels.lcs_length(a, b)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return 2.0 * p * r / (p + r)


def span_bounds(doc_len: int, max_span_len: int) -> list[tuple[int, int]]:
    """All (s, e) span bounds with length <= max_span_len, in canonical order."""
    return [
        (s, e)
        for s in range(doc_len)
        for e in range(s, min(s + max_span_len, doc_len))
    ]


def count_spans(doc_len: int, max_span_len: int) -> int:
    return sum(min(max_span_len, doc_len - s) for s in range(doc_len))


def _gold_token_lists(answers: Sequence[str]) -> list[list[str]]:
    golds = []
    seen = set()
    for ans in answers:
        toks = normalize_text(ans).split()
        key = tuple(toks)
        if toks and key not in seen:
            seen.add(key)
            golds.append(toks)
    return golds


def _score_spans(doc: Document, answers: Sequence[str], m: Matcher) -> np.ndarray:
    """Score of every bounded span against the best-matching gold string.

    The returned array follows the span_bounds layout.
    """
    L = len(doc)
    norm = [normalize_text(t.text) for t in doc.tokens]
    golds = _gold_token_lists(answers)
    n_spans = count_spans(L, m.max_span_len)
    scores = np.zeros(n_spans, dtype=np.float64)
    if not golds:
        return scores

    offsets = np.zeros(L, dtype=np.int64)
    for s in range(1, L):
        offsets[s] = offsets[s - 1] + min(m.max_span_len, L - (s - 1))

    if m.kind is MatchKind.EXACT:
        gold_set = {tuple(g) for g in golds}
        max_gold = max(len(g) for g in golds)
        for s in range(L):
            toks: list[str] = []
            for e in range(s, min(s + m.max_span_len, L)):
                if norm[e]:
                    toks.append(norm[e])
                    if len(toks) > max_gold:
                        break
                if tuple(toks) in gold_set:
                    scores[offsets[s] + (e - s)] = 1.0
        return scores

    vocab: dict[str, int] = {}
    ids = np.array(
        [vocab.setdefault(t, len(vocab)) if t else -1 for t in norm], dtype=np.int64
    )
    buf = np.zeros(n_spans, dtype=np.float64)
    for g in golds:
        ref = np.array([vocab.setdefault(t, len(vocab)) for t in g], dtype=np.int64)
        kernels.rouge_span_f1(ids, ref, m.max_span_len, buf)
        np.maximum(scores, buf, out=scores)
    return scores


def _to_solution_set(example_id, bounds, mask, candidate_count) -> SolutionSet:
    spans = tuple(Span(s, e) for (s, e), keep in zip(bounds, mask) if keep)
    return SolutionSet(example_id, spans, candidate_count)


def find_matching_spans(
    doc: Document, answers: Sequence[str], m: Matcher, example_id: str = ""
) -> SolutionSet:
    """All bounded spans attaining the maximum match score; empty if that is 0."""
    scores = _score_spans(doc, answers, m)
    bounds = span_bounds(len(doc), m.max_span_len)
    g_max = scores.max(initial=0.0)
    if g_max <= 0.0:
        return SolutionSet(example_id, (), len(bounds))
    return _to_solution_set(example_id, bounds, scores == g_max, len(bounds))


def find_noisy_spans(
    doc: Document, answers: Sequence[str], m: Matcher, example_id: str = ""
) -> SolutionSet:
    """Noisier solution set: spans scoring at or above the k-th highest score.

    Ranks run over distinct positive score values; with fewer than k of them
    every positive-scoring span qualifies.  Zero-score spans never enter.
    """
    if m.noisy_rank_k is None:
        raise ValueError("matcher.noisy_rank_k is required for find_noisy_spans")
    scores = _score_spans(doc, answers, m)
    bounds = span_bounds(len(doc), m.max_span_len)
    positive = np.unique(scores[scores > 0.0])
    if positive.size == 0:
        return SolutionSet(example_id, (), len(bounds))
    k = min(m.noisy_rank_k, positive.size)
    threshold = positive[-k]
    return _to_solution_set(example_id, bounds, scores >= threshold, len(bounds))
