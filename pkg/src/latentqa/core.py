"""Shared domain types, answer normalization, and canonical solution ordering."""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_WS_RE = re.compile(r"\s+")
_PUNC_TABLE = str.maketrans("", "", string.punctuation)

# Numbers keep comma grouping and decimal points as one token; everything
# else splits into word runs or single punctuation characters.
_TOKEN_RE = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\w+|[^\w\s]")

_NUMBER_RE = re.compile(r"[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?")

_NUMBER_WORDS = {
    "zero": 0.0,
    "one": 1.0,
    "two": 2.0,
    "three": 3.0,
    "four": 4.0,
    "five": 5.0,
    "six": 6.0,
    "seven": 7.0,
    "eight": 8.0,
    "nine": 9.0,
    "ten": 10.0,
}


class TaskKind(Enum):
    SPAN_EXTRACTION = "span"
    ARITHMETIC = "arithmetic"
    SQL_GENERATION = "sql"


def normalize_text(s: str) -> str:
    """Canonical answer form: lowercase, no ASCII punctuation, no articles.

    Articles (a/an/the) are dropped as whole tokens and whitespace is
    collapsed, so repeated application is a no-op.
    """
    s = s.lower()
    s = s.translate(_PUNC_TABLE)
    s = _ARTICLE_RE.sub(" ", s)
    return _WS_RE.sub(" ", s).strip()


def parse_number(text: str) -> float | None:
    """Parse one token or answer string as a number, else None.

    Accepts integers, decimals, comma-grouped digits, an optional sign, and
    the spelled-out words zero through ten.
    """
    t = text.strip().lower()
    if t in _NUMBER_WORDS:
        return _NUMBER_WORDS[t]
    if _NUMBER_RE.fullmatch(t):
        return float(t.replace(",", ""))
    return None


@dataclass(frozen=True)
class Token:
    """One surface token with its character offset into the source text."""

    text: str
    char_start: int

    def __post_init__(self):
        if not self.text or any(c.isspace() for c in self.text):
            raise ValueError(f"token text must be non-empty and whitespace-free: {self.text!r}")
        if self.char_start < 0:
            raise ValueError("char_start must be >= 0")


def tokenize(text: str) -> tuple[Token, ...]:
    """Whitespace+punctuation tokenizer that keeps numbers like 2,582,322 whole."""
    return tuple(Token(m.group(0), m.start()) for m in _TOKEN_RE.finditer(text))


def detokenize(tokens: Sequence[Token], start: int, end: int) -> str:
    """Reconstruct the literal text of tokens[start..end] (inclusive).

    Character offsets decide whether adjacent tokens touch ("1996-97") or
    are separated by a single space.
    """
    parts = [tokens[start].text]
    for i in range(start + 1, end + 1):
        prev = tokens[i - 1]
        if tokens[i].char_start > prev.char_start + len(prev.text):
            parts.append(" ")
        parts.append(tokens[i].text)
    return "".join(parts)


@dataclass(frozen=True)
class Document:
    """Token sequence a span-extraction or arithmetic example reads from."""

    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("document must contain at least one token")
        starts = [t.char_start for t in self.tokens]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("token offsets must be strictly increasing")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Example:
    """One weak-supervision instance: question, context, and gold answer text.

    ``answers`` holds every acceptable gold surface form.  For the SQL task it
    is the expected result multiset rather than an alias list.
    """

    id: str
    question: tuple[Token, ...]
    context: object  # Document or sqlgen.Table, matching ``task``
    answers: tuple[str, ...]
    task: TaskKind

    def __post_init__(self):
        if not self.question:
            raise ValueError("question must be non-empty")
        if not self.answers:
            raise ValueError("answers must be non-empty")
        is_doc = isinstance(self.context, Document)
        if self.task in (TaskKind.SPAN_EXTRACTION, TaskKind.ARITHMETIC) and not is_doc:
            raise ValueError(f"{self.task.value} task requires a Document context")
        if self.task is TaskKind.SQL_GENERATION and is_doc:
            raise ValueError("sql task requires a Table context")


def canonical_key(solution) -> tuple:
    """Sort key defining the deterministic candidate order for a variant."""
    return solution.sort_key()


def canonical_order(a, b) -> int:
    """Three-way comparison of two same-variant solutions (-1, 0, or 1)."""
    if type(a) is not type(b):
        raise TypeError(f"cannot order {type(a).__name__} against {type(b).__name__}")
    ka, kb = a.sort_key(), b.sort_key()
    return (ka > kb) - (ka < kb)


def canonical_sort(solutions: Iterable) -> tuple:
    """Solutions sorted into canonical order."""
    sols = list(solutions)
    for s in sols[1:]:
        if type(s) is not type(sols[0]):
            raise TypeError("canonical_sort requires a homogeneous solution list")
    return tuple(sorted(sols, key=canonical_key))


@dataclass(frozen=True)
class SolutionSet:
    """An example's precomputed answer-consistent solutions, canonically ordered.

    ``candidate_count`` records how many candidates were enumerated overall,
    not just the ones that matched.
    """

    example_id: str
    solutions: tuple
    candidate_count: int

    def __post_init__(self):
        if self.candidate_count < len(self.solutions):
            raise ValueError("candidate_count cannot be below the solution count")
        if len(set(self.solutions)) != len(self.solutions):
            raise ValueError("solution set contains duplicates")
        keys = [canonical_key(s) for s in self.solutions]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("solutions are not in canonical order")

    def __len__(self) -> int:
        return len(self.solutions)
