"""Equation-space enumeration and execution for discrete-reasoning RC.

Candidates are signed two-operand forms (o1, n1, o2, n2) over numbers found
in the document and question plus a fixed list of special constants; the
solution set keeps every candidate executing to the gold number.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

from latentqa.core import Document, Example, SolutionSet, TaskKind, Token, parse_number

DEFAULT_SPECIAL_NUMBERS = (1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 12.0, 100.0, 1000.0)

DEFAULT_TOLERANCE = 1e-6


class NonNumericAnswer(ValueError):
    """No gold answer string parses as a number."""


class Operator(Enum):
    PLUS = "+"
    MINUS = "-"
    PERCENT = "%"


_OP_ORDER = {Operator.PLUS: 0, Operator.MINUS: 1, Operator.PERCENT: 2}
_OPERATORS = (Operator.PLUS, Operator.MINUS, Operator.PERCENT)


class MentionSource(Enum):
    DOCUMENT = "document"
    QUESTION = "question"
    SPECIAL = "special"


_SOURCE_RANK = {
    MentionSource.DOCUMENT: 0,
    MentionSource.QUESTION: 1,
    MentionSource.SPECIAL: 2,
}


@dataclass(frozen=True)
class NumberMention:
    """A numeric operand: its value and where it came from.

    ``index`` is a token index for document/question mentions and a position
    in the special-number list otherwise.
    """

    value: float
    source: MentionSource
    index: int

    def position_key(self) -> tuple[int, int]:
        return (_SOURCE_RANK[self.source], self.index)


@dataclass(frozen=True)
class Equation:
    """Signed two-operand form; executes to u(o1, n1) + u(o2, n2)."""

    o1: Operator
    n1: NumberMention
    o2: Operator
    n2: NumberMention

    def __post_init__(self):
        if (self.n1.source, self.n1.index) == (self.n2.source, self.n2.index):
            raise ValueError("equation operands must be distinct mentions")

    def sort_key(self):
        return (
            *self.n1.position_key(),
            *self.n2.position_key(),
            _OP_ORDER[self.o1],
            _OP_ORDER[self.o2],
        )


def _signed(op: Operator, value: float) -> float:
    if op is Operator.PLUS:
        return value
    if op is Operator.MINUS:
        return -value
    return 0.01 * value


def execute_equation(z: Equation) -> float:
    return _signed(z.o1, z.n1.value) + _signed(z.o2, z.n2.value)


def extract_numbers(
    question: Sequence[Token], doc: Document
) -> tuple[NumberMention, ...]:
    """Every numeric token as a mention, document first, then question.

    Covers digits, decimals, comma grouping, and the words zero through ten;
    equal values at distinct positions stay distinct.
    """
    mentions = []
    for i, tok in enumerate(doc.tokens):
        v = parse_number(tok.text)
        if v is not None:
            mentions.append(NumberMention(v, MentionSource.DOCUMENT, i))
    for i, tok in enumerate(question):
        v = parse_number(tok.text)
        if v is not None:
            mentions.append(NumberMention(v, MentionSource.QUESTION, i))
    return tuple(mentions)


def special_mentions(specials: Sequence[float]) -> tuple[NumberMention, ...]:
    if len(set(specials)) != len(specials):
        raise ValueError("special numbers must not contain duplicates")
    return tuple(
        NumberMention(float(v), MentionSource.SPECIAL, i) for i, v in enumerate(specials)
    )


def enumerate_equations(
    mentions: Sequence[NumberMention],
    specials: Sequence[float] = DEFAULT_SPECIAL_NUMBERS,
    allow_copy: bool = False,
) -> Iterator[Equation]:
    """All equations over the mentions plus specials, in canonical order.

    Yields 9*m*(m-1) equations for m total operands; distinct slots may carry
    equal values from different positions.  ``allow_copy`` adds one
    (+, n, +, 0) copy form per operand, with the zero constant sitting past
    the end of the special-number list.
    """
    operands = sorted(mentions, key=NumberMention.position_key) + list(
        special_mentions(specials)
    )
    if len({m.position_key() for m in operands}) != len(operands):
        raise ValueError("mentions must be unique by (source, index)")
    zero = NumberMention(0.0, MentionSource.SPECIAL, len(specials))
    for n1 in operands:
        for n2 in operands:
            if n1 is n2:
                continue
            for o1 in _OPERATORS:
                for o2 in _OPERATORS:
                    yield Equation(o1, n1, o2, n2)
        if allow_copy:
            yield Equation(Operator.PLUS, n1, Operator.PLUS, zero)


def gold_numbers(answers: Sequence[str]) -> tuple[float, ...]:
    return tuple(v for v in (parse_number(a) for a in answers) if v is not None)


def arithmetic_solution_set(
    ex: Example,
    specials: Sequence[float] = DEFAULT_SPECIAL_NUMBERS,
    tol: float = DEFAULT_TOLERANCE,
    allow_copy: bool = False,
) -> SolutionSet:
    """Every enumerated equation executing within tol of a gold number."""
    if ex.task is not TaskKind.ARITHMETIC:
        raise ValueError(f"expected an arithmetic example, got {ex.task}")
    golds = gold_numbers(ex.answers)
    if not golds:
        raise NonNumericAnswer(f"example {ex.id}: no answer parses as a number")
    mentions = extract_numbers(ex.question, ex.context)
    kept = []
    total = 0
    for eq in enumerate_equations(mentions, specials, allow_copy=allow_copy):
        total += 1
        value = execute_equation(eq)
        if any(abs(value - g) <= tol for g in golds):
            kept.append(eq)
    return SolutionSet(ex.id, tuple(kept), total)
