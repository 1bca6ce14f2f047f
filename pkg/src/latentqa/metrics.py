"""Evaluation: exact match, token F1, answer ROUGE-L, sparsity, |Z| breakdowns."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from latentqa.core import normalize_text, parse_number
from latentqa.span_match import rouge_l  # single ROUGE-L implementation, re-exported

__all__ = [
    "exact_match",
    "token_f1",
    "rouge_l",
    "rouge_l_answer",
    "sparsity",
    "ExampleRecord",
    "EvalResult",
    "BucketRow",
    "breakdown_by_z",
    "DEFAULT_EPSILONS",
    "DEFAULT_Z_BUCKETS",
]

DEFAULT_EPSILONS = (1e-3, 1e-4)

# (lo, hi) inclusive; hi None means unbounded.
DEFAULT_Z_BUCKETS = ((0, 0), (1, 1), (2, 3), (4, None))


def exact_match(pred: str, golds: Sequence[str], numeric: bool = False) -> int:
    """1 iff the normalized prediction equals any normalized gold.

    With ``numeric`` enabled, both sides are first compared as parsed numbers
    when they both parse ("4.0" matches "4"); used for arithmetic answers.
    """
    if numeric:
        pv = parse_number(pred)
        if pv is not None:
            for g in golds:
                gv = parse_number(g)
                if gv is not None and pv == gv:
                    return 1
    norm = normalize_text(pred)
    return int(any(norm == normalize_text(g) for g in golds))


def token_f1(pred: str, golds: Sequence[str]) -> float:
    """Best bag-of-tokens F1 over the golds, on normalized tokens."""
    pred_toks = normalize_text(pred).split()
    best = 0.0
    for g in golds:
        gold_toks = normalize_text(g).split()
        if not pred_toks and not gold_toks:
            best = max(best, 1.0)
            continue
        if not pred_toks or not gold_toks:
            continue
        common = Counter(pred_toks) & Counter(gold_toks)
        same = sum(common.values())
        if same == 0:
            continue
        p = same / len(pred_toks)
        r = same / len(gold_toks)
        best = max(best, 2 * p * r / (p + r))
    return best


def rouge_l_answer(pred: str, golds: Sequence[str]) -> float:
    """Best ROUGE-L F1 of the prediction against the golds, on normalized tokens."""
    pred_toks = normalize_text(pred).split()
    return max((rouge_l(pred_toks, normalize_text(g).split()) for g in golds), default=0.0)


def sparsity(z_probs: Sequence[float], epsilon: float) -> float:
    """Fraction of Z-members whose model probability falls below epsilon."""
    probs = np.asarray(z_probs, dtype=np.float64)
    if probs.size == 0:
        raise ValueError("sparsity requires a non-empty Z")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return float((probs < epsilon).sum() / probs.size)


@dataclass(frozen=True)
class ExampleRecord:
    """Per-example evaluation outcome."""

    id: str
    prediction: object | None
    answer_text: str
    em: int
    f1: float
    rouge: float
    z_size: int
    sparsity: dict[float, float] = field(default_factory=dict)


@dataclass(frozen=True)
class EvalResult:
    records: tuple[ExampleRecord, ...]
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS

    def __len__(self) -> int:
        return len(self.records)

    @property
    def mean_em(self) -> float:
        return float(np.mean([r.em for r in self.records])) if self.records else 0.0

    @property
    def mean_f1(self) -> float:
        return float(np.mean([r.f1 for r in self.records])) if self.records else 0.0

    @property
    def mean_rouge(self) -> float:
        return float(np.mean([r.rouge for r in self.records])) if self.records else 0.0

    def mean_sparsity(self, epsilon: float) -> float | None:
        """Per-example mean over the examples where sparsity is defined (|Z| >= 1)."""
        vals = [r.sparsity[epsilon] for r in self.records if epsilon in r.sparsity]
        return float(np.mean(vals)) if vals else None


@dataclass(frozen=True)
class BucketRow:
    lo: int
    hi: int | None
    count: int
    mean_em: float

    @property
    def label(self) -> str:
        if self.hi is None:
            return f"{self.lo}+"
        if self.lo == self.hi:
            return str(self.lo)
        return f"{self.lo}-{self.hi}"


def breakdown_by_z(
    z_sizes: Sequence[int],
    ems: Sequence[float],
    buckets: Sequence[tuple[int, int | None]] = DEFAULT_Z_BUCKETS,
) -> list[BucketRow]:
    """Count and mean EM per |Z| bucket; the buckets must cover every size."""
    if len(z_sizes) != len(ems):
        raise ValueError("z_sizes and ems must align")
    rows = []
    assigned = 0
    for lo, hi in buckets:
        member = [
            em
            for z, em in zip(z_sizes, ems)
            if z >= lo and (hi is None or z <= hi)
        ]
        assigned += len(member)
        rows.append(
            BucketRow(lo, hi, len(member), float(np.mean(member)) if member else 0.0)
        )
    if assigned != len(z_sizes):
        raise ValueError("buckets do not cover all observed |Z| values exactly once")
    return rows
