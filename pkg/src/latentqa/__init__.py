"""Weakly supervised QA as discrete latent-variable learning.

Precompute a task-specific candidate space per example, filter it to the
answer-consistent solution set, and train probabilistic scorers with
first-only, maximum-marginal-likelihood, or hard (argmax) updates, with an
optional annealing schedule between the last two.
"""

from latentqa.core import (
    Document,
    Example,
    SolutionSet,
    TaskKind,
    Token,
    canonical_order,
    canonical_sort,
    normalize_text,
    tokenize,
)
from latentqa.learning import (
    AnnealDirection,
    CandidateDistribution,
    FactorizedSpanScorer,
    FactorizedTagScorer,
    LogLinearScorer,
    Objective,
    TabularScorer,
    TrainConfig,
    anneal_probability,
    loss_and_grad,
    train,
)
from latentqa.span_match import Matcher, MatchKind, Span, find_matching_spans, find_noisy_spans, rouge_l
from latentqa.arithmetic import (
    DEFAULT_SPECIAL_NUMBERS,
    Equation,
    NumberMention,
    arithmetic_solution_set,
    enumerate_equations,
    execute_equation,
    extract_numbers,
)
from latentqa.sqlgen import (
    Agg,
    CondOp,
    Condition,
    EnumLimits,
    Pruning,
    SqlQuery,
    Table,
    build_table,
    enumerate_queries,
    execute_query,
    question_spans,
    sql_solution_set,
)

__version__ = "0.1.0"
