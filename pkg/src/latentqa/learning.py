"""Probabilistic scorers over candidate solutions and the training objectives.

Every scorer maps a candidate to a feature row, so its log-probabilities are
a softmax of ``features @ params`` over the candidate set and all gradients
are exact.  The factorized scorers keep their per-token score structure: a
span's logit is its start score plus its end score, an equation's logit is
the sum of the tag scores its operands induce.  Renormalizing those factored
products over the candidate set is identical to this softmax because the
per-position normalizers are shared by every candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from latentqa.arithmetic import Equation, MentionSource, Operator
from latentqa.core import Example, TaskKind
from latentqa.features import document_features, sequence_features, token_feature_dim
from latentqa.span_match import Span
from latentqa.sqlgen import Agg, CondOp, SqlQuery


class FeatureDimensionMismatch(ValueError):
    """Feature rows do not match the scorer's parameter vector."""


class EmptySolutionSet(ValueError):
    """An objective was asked to train on an example with no solutions."""


class NonFiniteLoss(RuntimeError):
    def __init__(self, example_id: str):
        super().__init__(f"non-finite loss on example {example_id}")
        self.example_id = example_id


def log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max()
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum())


def _solution_task(solution) -> TaskKind:
    if isinstance(solution, Span):
        return TaskKind.SPAN_EXTRACTION
    if isinstance(solution, Equation):
        return TaskKind.ARITHMETIC
    if isinstance(solution, SqlQuery):
        return TaskKind.SQL_GENERATION
    raise TypeError(f"unknown solution type {type(solution).__name__}")


@dataclass(frozen=True, eq=False)
class CandidateDistribution:
    """Log-probabilities over an ordered candidate list.

    ``features`` carries the rows the logits came from so objectives can
    produce parameter gradients.
    """

    candidates: tuple
    log_probs: np.ndarray
    features: np.ndarray | None = None

    def __post_init__(self):
        if len(self.candidates) != self.log_probs.shape[0]:
            raise ValueError("one log-probability per candidate required")
        total = float(np.exp(self.log_probs).sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)


class Scorer:
    """Base: a parameter vector plus a per-candidate feature map."""

    kind: str = ""

    def __init__(self, params: np.ndarray):
        self.params = np.asarray(params, dtype=np.float64)

    def feature_matrix(self, example: Example, candidates: Sequence) -> np.ndarray:
        raise NotImplementedError

    def score_candidates(self, example: Example, candidates: Sequence) -> CandidateDistribution:
        if not candidates:
            raise ValueError("candidates must be non-empty")
        for c in candidates:
            if _solution_task(c) is not example.task:
                raise ValueError(
                    f"candidate {type(c).__name__} does not match task {example.task.value}"
                )
        feats = self.feature_matrix(example, candidates)
        if feats.shape[1] != self.params.shape[0]:
            raise FeatureDimensionMismatch(
                f"features have dim {feats.shape[1]}, parameters {self.params.shape[0]}"
            )
        logits = feats @ self.params
        return CandidateDistribution(tuple(candidates), log_softmax(logits), feats)


class TabularScorer(Scorer):
    """One parameter per candidate rank; a diagnostic scorer for small tests."""

    kind = "tabular"

    def __init__(self, size: int, params: np.ndarray | None = None):
        self.size = size
        super().__init__(np.zeros(size) if params is None else params)

    def feature_matrix(self, example, candidates):
        if len(candidates) > self.size:
            raise FeatureDimensionMismatch(
                f"{len(candidates)} candidates exceed tabular size {self.size}"
            )
        out = np.zeros((len(candidates), self.size), dtype=np.float64)
        out[np.arange(len(candidates)), np.arange(len(candidates))] = 1.0
        return out


def _loglinear_span(example, candidates, feature_set):
    psi = document_features(example, feature_set)
    idx_s = [c.s for c in candidates]
    idx_e = [c.e for c in candidates]
    return np.hstack([psi[idx_s], psi[idx_e]])


_OP_INDEX = {Operator.PLUS: 0, Operator.MINUS: 1, Operator.PERCENT: 2}


def _mention_row(example, mention, feature_set):
    full, offset = sequence_features(example, feature_set)
    if mention.source is MentionSource.QUESTION:
        return full[mention.index]
    if mention.source is MentionSource.DOCUMENT:
        return full[offset + mention.index]
    return np.zeros(full.shape[1])


def _loglinear_equation(example, candidates, feature_set):
    k = token_feature_dim(feature_set)
    out = np.zeros((len(candidates), 2 * k + 8), dtype=np.float64)
    for i, eq in enumerate(candidates):
        out[i, :k] = _mention_row(example, eq.n1, feature_set)
        out[i, k : 2 * k] = _mention_row(example, eq.n2, feature_set)
        out[i, 2 * k + _OP_INDEX[eq.o1]] = 1.0
        out[i, 2 * k + 3 + _OP_INDEX[eq.o2]] = 1.0
        out[i, 2 * k + 6] = eq.n1.source is MentionSource.SPECIAL
        out[i, 2 * k + 7] = eq.n2.source is MentionSource.SPECIAL
    return out


_AGG_INDEX = {a: i for i, a in enumerate(Agg)}
_CONDOP_INDEX = {o: i for i, o in enumerate(CondOp)}


def _loglinear_sql(example, candidates, feature_set):
    # 1 bias + 6 agg + 4 condition-count + 1 numeric-sel + 3 op counts
    out = np.zeros((len(candidates), 15), dtype=np.float64)
    table = example.context
    from latentqa.sqlgen import ColumnKind  # local to avoid unused import at top

    for i, q in enumerate(candidates):
        out[i, 0] = 1.0
        out[i, 1 + _AGG_INDEX[q.agg]] = 1.0
        out[i, 7 + len(q.conditions)] = 1.0
        out[i, 11] = table.schema.column_kinds[q.sel] is ColumnKind.NUMERIC
        for c in q.conditions:
            out[i, 12 + _CONDOP_INDEX[c.op]] += 1.0
    return out


_LOGLINEAR_BUILDERS = {
    TaskKind.SPAN_EXTRACTION: (_loglinear_span, lambda k: 2 * k),
    TaskKind.ARITHMETIC: (_loglinear_equation, lambda k: 2 * k + 8),
    TaskKind.SQL_GENERATION: (_loglinear_sql, lambda k: 15),
}


class LogLinearScorer(Scorer):
    """theta . phi(x, z) with a fixed task-specific feature extractor."""

    kind = "loglinear"

    def __init__(self, task: TaskKind, feature_set: str = "default", params=None):
        self.task = task
        self.feature_set = feature_set
        builder, dim_fn = _LOGLINEAR_BUILDERS[task]
        self._builder = builder
        self.dim = dim_fn(token_feature_dim(feature_set))
        super().__init__(np.zeros(self.dim) if params is None else params)

    def feature_matrix(self, example, candidates):
        return self._builder(example, candidates, self.feature_set)


class FactorizedSpanScorer(Scorer):
    """Start/end token scores from a linear layer over token features.

    A span's probability factorizes as p_start[s] * p_end[e], renormalized
    over the candidate spans.
    """

    kind = "factorized_span"

    def __init__(self, feature_set: str = "default", params=None):
        self.feature_set = feature_set
        k = token_feature_dim(feature_set)
        super().__init__(np.zeros(2 * k) if params is None else params)

    def feature_matrix(self, example, candidates):
        return _loglinear_span(example, candidates, self.feature_set)


# Tag codes: 0 = unused, 1 = '+', 2 = '-', 3 = '*0.01'.
_N_TAGS = 4


class FactorizedTagScorer(Scorer):
    """Sequence-tagging scorer for equations.

    Each question/document token carries a 4-way tag distribution from a
    linear layer over its features; each special number has its own 4-way
    tag parameters.  An equation's probability is the product of the tag
    probabilities its operand assignment induces, renormalized over the
    candidate set.
    """

    kind = "factorized_tag"

    def __init__(self, n_specials: int, feature_set: str = "default", params=None):
        self.n_specials = n_specials
        self.feature_set = feature_set
        k = token_feature_dim(feature_set)
        self._k = k
        dim = _N_TAGS * k + _N_TAGS * n_specials
        super().__init__(np.zeros(dim) if params is None else params)

    def feature_matrix(self, example, candidates):
        full, offset = sequence_features(example, self.feature_set)
        k = self._k
        dim = _N_TAGS * k + _N_TAGS * self.n_specials
        base = np.zeros(dim, dtype=np.float64)
        base[:k] = full.sum(axis=0)
        u0 = _N_TAGS * k
        base[u0 : u0 + _N_TAGS * self.n_specials : _N_TAGS] = 1.0
        out = np.tile(base, (len(candidates), 1))
        for i, eq in enumerate(candidates):
            for op, mention in ((eq.o1, eq.n1), (eq.o2, eq.n2)):
                tag = _OP_INDEX[op] + 1
                if mention.source is MentionSource.SPECIAL:
                    # The copy-form zero constant sits past the special list
                    # and carries no tag parameters.
                    if mention.index < self.n_specials:
                        out[i, u0 + _N_TAGS * mention.index] = 0.0
                        out[i, u0 + _N_TAGS * mention.index + tag] = 1.0
                    continue
                pos = mention.index
                if mention.source is MentionSource.DOCUMENT:
                    pos += offset
                row = full[pos]
                out[i, :k] -= row
                out[i, tag * k : (tag + 1) * k] += row
        return out


SCORER_KINDS = ("tabular", "loglinear", "factorized_span", "factorized_tag")


class Objective(Enum):
    FIRST_ONLY = "first_only"
    MML = "mml"
    HARD = "hard"
    ANNEALED_HARD = "annealed_hard"


class AnnealDirection(Enum):
    PAPER_LITERAL = "literal"
    INVERTED = "inverted"


def anneal_probability(t: int, tau: int) -> float:
    """Mixing probability min(t / tau, 1)."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return min(t / tau, 1.0)


def resolve_annealed(
    t: int, tau: int, direction: AnnealDirection, rng: np.random.Generator
) -> Objective:
    """Draw this step's objective for annealed training.

    In the literal direction the marginal objective is applied with
    probability min(t/tau, 1), so training ends in pure MML; inverted flips
    the rule and ends in pure hard updates.
    """
    p = anneal_probability(t, tau)
    u = rng.random()
    if direction is AnnealDirection.PAPER_LITERAL:
        return Objective.MML if u < p else Objective.HARD
    return Objective.HARD if u < p else Objective.MML


@dataclass(frozen=True)
class TrainConfig:
    objective: Objective = Objective.MML
    tau: int = 1
    anneal_direction: AnnealDirection = AnnealDirection.PAPER_LITERAL
    learning_rate: float = 0.1
    batch_size: int = 32
    max_steps: int = 100
    rng_seed: int = 0
    gradient_clip: float = 5.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.batch_size < 1 or self.max_steps < 0:
            raise ValueError("batch_size must be >= 1 and max_steps >= 0")


def loss_and_grad(
    dist: CandidateDistribution,
    z_indices: Sequence[int],
    objective: Objective,
    t: int = 0,
    *,
    tau: int = 1,
    anneal_direction: AnnealDirection = AnnealDirection.PAPER_LITERAL,
    rng: np.random.Generator | None = None,
) -> tuple[float, np.ndarray]:
    """Loss and exact parameter gradient for one example.

    First-only trains on the canonically first member of Z (candidates are
    required to be in canonical order), the marginal objective on the summed
    probability of Z, and the hard objective on the current argmax of Z with
    the argmax index held fixed for the gradient.  Ties break toward the
    canonical-first member.
    """
    z = np.asarray(sorted(z_indices), dtype=np.int64)
    if z.size == 0:
        raise EmptySolutionSet("cannot train on an example with empty Z")
    n = len(dist.candidates)
    if z[0] < 0 or z[-1] >= n:
        raise IndexError("Z indices out of candidate range")
    if dist.features is None:
        raise ValueError("distribution carries no features; gradient unavailable")

    if objective is Objective.ANNEALED_HARD:
        if rng is None:
            raise ValueError("annealed objective needs the run's generator")
        objective = resolve_annealed(t, tau, anneal_direction, rng)

    logp = dist.log_probs
    p = np.exp(logp)
    grad_logits = p.copy()
    if objective is Objective.MML:
        z_logp = logp[z]
        m = z_logp.max()
        lse = m + np.log(np.exp(z_logp - m).sum())
        loss = -lse
        grad_logits[z] -= np.exp(z_logp - lse)
    else:
        if objective is Objective.FIRST_ONLY:
            target = int(z[0])
        else:  # HARD: argmax over Z, first index on ties
            target = int(z[np.argmax(logp[z])])
        loss = -float(logp[target])
        grad_logits[target] -= 1.0
    return float(loss), dist.features.T @ grad_logits


@dataclass(frozen=True)
class TrainInstance:
    """One training example with its candidate list and Z indices."""

    example: Example
    candidates: tuple
    z_indices: tuple[int, ...]


def make_instance(example: Example, solutions: Sequence, candidates: Sequence) -> TrainInstance:
    index = {c: i for i, c in enumerate(candidates)}
    try:
        z = tuple(sorted(index[s] for s in solutions))
    except KeyError as err:
        raise ValueError(f"solution {err.args[0]!r} is not among the candidates") from None
    return TrainInstance(example, tuple(candidates), z)


@dataclass(frozen=True)
class StepRecord:
    step: int
    objective: str
    loss: float


def train(
    instances: Sequence[TrainInstance], scorer: Scorer, config: TrainConfig
) -> list[StepRecord]:
    """Mini-batch SGD over the instances; updates the scorer in place.

    Batches are drawn from seeded epoch permutations; the objective draw
    uses a second stream so annealed and plain runs see identical batches.
    Bitwise deterministic given (seed, config, data order).
    """
    for inst in instances:
        if not inst.z_indices:
            raise EmptySolutionSet(f"example {inst.example.id} has empty Z")
    log: list[StepRecord] = []
    if not instances or config.max_steps == 0:
        return log
    batch_rng = np.random.default_rng([config.rng_seed, 0])
    anneal_rng = np.random.default_rng([config.rng_seed, 1])
    n = len(instances)
    batch_size = min(config.batch_size, n)
    perm = batch_rng.permutation(n)
    cursor = 0
    for t in range(1, config.max_steps + 1):
        objective = config.objective
        if objective is Objective.ANNEALED_HARD:
            objective = resolve_annealed(
                t, config.tau, config.anneal_direction, anneal_rng
            )
        if cursor + batch_size > n:
            perm = batch_rng.permutation(n)
            cursor = 0
        batch = perm[cursor : cursor + batch_size]
        cursor += batch_size

        grad = np.zeros_like(scorer.params)
        total_loss = 0.0
        for i in batch:
            inst = instances[i]
            dist = scorer.score_candidates(inst.example, inst.candidates)
            loss, g = loss_and_grad(dist, inst.z_indices, objective)
            if not np.isfinite(loss) or not np.all(np.isfinite(g)):
                raise NonFiniteLoss(inst.example.id)
            total_loss += loss
            grad += g
        grad /= len(batch)
        if config.gradient_clip > 0:
            norm = float(np.linalg.norm(grad))
            if norm > config.gradient_clip:
                grad *= config.gradient_clip / norm
        scorer.params -= config.learning_rate * grad
        log.append(StepRecord(t, objective.value, total_loss / len(batch)))
    return log
