"""Bounded SQL query space over a question and table, with an executor.

Queries are non-nested selects: one column, an optional aggregator, and up
to three AND-ed conditions whose values are literal question spans.  The
solution set keeps every query whose denotation matches the gold answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple, Sequence

from latentqa.core import (
    Example,
    SolutionSet,
    TaskKind,
    Token,
    detokenize,
    normalize_text,
    parse_number,
    tokenize,
)


class AggregationTypeError(TypeError):
    """Sum/Mean applied to a non-numeric column."""


class Agg(Enum):
    NONE = "none"
    SUM = "sum"
    MEAN = "mean"
    MAX = "max"
    MIN = "min"
    COUNT = "count"


_AGG_ORDER = {a: i for i, a in enumerate(Agg)}


class CondOp(Enum):
    EQ = "="
    LT = "<"
    GT = ">"


_COND_OP_ORDER = {CondOp.EQ: 0, CondOp.LT: 1, CondOp.GT: 2}


class ColumnKind(Enum):
    TEXT = "text"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class TableSchema:
    """Column titles (tokenized) and inferred column kinds."""

    headers: tuple[tuple[Token, ...], ...]
    column_kinds: tuple[ColumnKind, ...]

    def __post_init__(self):
        if not self.headers:
            raise ValueError("table must have at least one column")
        if any(not h for h in self.headers):
            raise ValueError("header titles must be non-empty")
        if len(self.column_kinds) != len(self.headers):
            raise ValueError("one column kind per header required")

    @property
    def n_columns(self) -> int:
        return len(self.headers)


@dataclass(frozen=True)
class TableData:
    """Cell strings per row, with parsed numeric and normalized shadows."""

    rows: tuple[tuple[str, ...], ...]
    numeric: tuple[tuple[float | None, ...], ...]
    normalized: tuple[tuple[str, ...], ...]

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Table:
    schema: TableSchema
    data: TableData


def build_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> Table:
    """Assemble a Table from raw strings, inferring column kinds.

    A column is numeric when it has at least one non-empty cell and every
    non-empty cell parses as a number.
    """
    header_tokens = tuple(tokenize(h) for h in headers)
    n = len(headers)
    str_rows = []
    for row in rows:
        if len(row) != n:
            raise ValueError(f"row has {len(row)} cells, expected {n}")
        str_rows.append(tuple(str(c) for c in row))
    numeric = tuple(tuple(parse_number(c) for c in row) for row in str_rows)
    normalized = tuple(tuple(normalize_text(c) for c in row) for row in str_rows)
    kinds = []
    for c in range(n):
        cells = [(row[c], num[c]) for row, num in zip(str_rows, numeric) if row[c].strip()]
        ok = bool(cells) and all(v is not None for _, v in cells)
        kinds.append(ColumnKind.NUMERIC if ok else ColumnKind.TEXT)
    schema = TableSchema(header_tokens, tuple(kinds))
    return Table(schema, TableData(tuple(str_rows), numeric, normalized))


@dataclass(frozen=True)
class Condition:
    """One filter: column op value, the value being a literal question span."""

    column: int
    op: CondOp
    value_text: str

    def sort_key(self):
        return (self.column, _COND_OP_ORDER[self.op], self.value_text)


@dataclass(frozen=True)
class SqlQuery:
    sel: int
    agg: Agg
    conditions: tuple[Condition, ...]

    def __post_init__(self):
        if len(self.conditions) > 3:
            raise ValueError("at most three conditions allowed")
        if len(set(self.conditions)) != len(self.conditions):
            raise ValueError("duplicate conditions are not allowed")
        keys = [c.sort_key() for c in self.conditions]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("conditions must be in canonical order")

    def sort_key(self):
        return (
            self.sel,
            _AGG_ORDER[self.agg],
            tuple(c.sort_key() for c in self.conditions),
        )


class QuestionSpan(NamedTuple):
    s: int
    e: int
    text: str


def question_spans(question: Sequence[Token], max_len: int) -> tuple[QuestionSpan, ...]:
    """All contiguous question spans up to max_len tokens, with literal text."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    spans = []
    for s in range(len(question)):
        for e in range(s, min(s + max_len, len(question))):
            spans.append(QuestionSpan(s, e, detokenize(question, s, e)))
    return tuple(spans)


def format_number(x: float) -> str:
    """Integers render without a decimal point, otherwise shortest round-trip."""
    if x == int(x):
        return str(int(x))
    return repr(float(x))


def _condition_holds(table: Table, row: int, cond: Condition, norm_value: str) -> bool:
    if cond.op is CondOp.EQ:
        return table.data.normalized[row][cond.column] == norm_value
    cell = table.data.numeric[row][cond.column]
    value = parse_number(cond.value_text)
    if cell is None or value is None:
        return False
    return cell < value if cond.op is CondOp.LT else cell > value


def _surviving_rows(table: Table, conditions: Sequence[Condition]) -> list[int]:
    norms = [normalize_text(c.value_text) for c in conditions]
    return [
        r
        for r in range(table.data.n_rows)
        if all(_condition_holds(table, r, c, nv) for c, nv in zip(conditions, norms))
    ]


def _aggregate(table: Table, rows: Sequence[int], sel: int, agg: Agg) -> tuple[str, ...]:
    data = table.data
    if agg is Agg.NONE:
        return tuple(data.rows[r][sel] for r in rows)
    if agg is Agg.COUNT:
        return (str(len(rows)),)
    if agg in (Agg.SUM, Agg.MEAN):
        if table.schema.column_kinds[sel] is not ColumnKind.NUMERIC:
            raise AggregationTypeError(f"{agg.value} requires a numeric column")
        values = [data.numeric[r][sel] for r in rows if data.numeric[r][sel] is not None]
        if not values:
            return ()
        total = sum(values)
        return (format_number(total if agg is Agg.SUM else total / len(values)),)
    # Max/Min: numeric extreme on numeric columns, else the raw cell whose
    # normalized text is the lexicographic extreme (first row wins ties).
    pick = max if agg is Agg.MAX else min
    if table.schema.column_kinds[sel] is ColumnKind.NUMERIC:
        values = [data.numeric[r][sel] for r in rows if data.numeric[r][sel] is not None]
        return (format_number(pick(values)),) if values else ()
    if not rows:
        return ()
    best = rows[0]
    for r in rows[1:]:
        if pick(data.normalized[r][sel], data.normalized[best][sel]) != data.normalized[best][sel]:
            best = r
    return (data.rows[best][sel],)


def execute_query(table: Table, z: SqlQuery) -> tuple[str, ...]:
    """Denotation of a query: filter rows by all conditions, then aggregate."""
    if not 0 <= z.sel < table.schema.n_columns:
        raise ValueError("sel column out of range")
    return _aggregate(table, _surviving_rows(table, z.conditions), z.sel, z.agg)


class Pruning(Enum):
    EXHAUSTIVE = "exhaustive"
    COLUMN_GROUNDED = "grounded"


@dataclass(frozen=True)
class EnumLimits:
    max_conditions: int = 3
    max_value_len: int = 8
    pruning: Pruning = Pruning.COLUMN_GROUNDED


def _condition_pool(
    question: Sequence[Token], table: Table, limits: EnumLimits
) -> list[Condition]:
    texts: list[str] = []
    seen = set()
    for span in question_spans(question, limits.max_value_len):
        if span.text not in seen:
            seen.add(span.text)
            texts.append(span.text)
    pool = []
    for col in range(table.schema.n_columns):
        col_cells = {table.data.normalized[r][col] for r in range(table.data.n_rows)}
        for op in (CondOp.EQ, CondOp.LT, CondOp.GT):
            for text in texts:
                if limits.pruning is Pruning.COLUMN_GROUNDED:
                    if op is CondOp.EQ:
                        norm = normalize_text(text)
                        if not norm or norm not in col_cells:
                            continue
                    elif parse_number(text) is None:
                        continue
                pool.append(Condition(col, op, text))
    pool.sort(key=Condition.sort_key)
    return pool


def _condition_combos(
    pool: Sequence[Condition], max_size: int
) -> Iterator[tuple[Condition, ...]]:
    """Subsets of the pool (size <= max_size) in lexicographic tuple order."""

    def rec(prefix: tuple[Condition, ...], start: int) -> Iterator[tuple[Condition, ...]]:
        yield prefix
        if len(prefix) == max_size:
            return
        for i in range(start, len(pool)):
            yield from rec(prefix + (pool[i],), i + 1)

    return rec((), 0)


def enumerate_queries(
    question: Sequence[Token], table: Table, limits: EnumLimits = EnumLimits()
) -> Iterator[SqlQuery]:
    """All queries over the grammar, in canonical order.

    Column-grounded pruning keeps Eq values that literally appear in the
    condition's column and Lt/Gt values that parse as numbers; exhaustive
    mode applies no value restriction.  Sum/Mean over text columns are
    skipped rather than raising.
    """
    pool = _condition_pool(question, table, limits)
    combos = list(_condition_combos(pool, limits.max_conditions))
    for sel in range(table.schema.n_columns):
        numeric_sel = table.schema.column_kinds[sel] is ColumnKind.NUMERIC
        for agg in Agg:
            if agg in (Agg.SUM, Agg.MEAN) and not numeric_sel:
                continue
            for conds in combos:
                yield SqlQuery(sel, agg, conds)


def sql_solution_set(
    ex: Example, limits: EnumLimits = EnumLimits()
) -> SolutionSet:
    """Every enumerated query whose denotation matches the gold answers.

    Matching is multiset equality of normalized strings.  A query's
    denotation depends only on (surviving-row mask, sel, agg), so condition
    combinations are walked once, with match results cached per distinct
    mask; this keeps the exhaustive mode tractable on small tables.
    """
    if ex.task is not TaskKind.SQL_GENERATION:
        raise ValueError(f"expected a sql example, got {ex.task}")
    table: Table = ex.context
    gold = sorted(normalize_text(a) for a in ex.answers)
    pool = _condition_pool(ex.question, table, limits)
    n_rows = table.data.n_rows
    all_rows_mask = (1 << n_rows) - 1
    cond_masks = []
    for cond in pool:
        norm = normalize_text(cond.value_text)
        mask = 0
        for r in range(n_rows):
            if _condition_holds(table, r, cond, norm):
                mask |= 1 << r
        cond_masks.append(mask)

    allowed = [
        (sel, agg)
        for sel in range(table.schema.n_columns)
        for agg in Agg
        if not (
            agg in (Agg.SUM, Agg.MEAN)
            and table.schema.column_kinds[sel] is not ColumnKind.NUMERIC
        )
    ]

    mask_info: dict[int, tuple[tuple[int, Agg], ...]] = {}

    def matching_pairs(mask: int) -> tuple[tuple[int, Agg], ...]:
        cached = mask_info.get(mask)
        if cached is None:
            rows = [r for r in range(n_rows) if mask & (1 << r)]
            cached = tuple(
                (sel, agg)
                for sel, agg in allowed
                if sorted(normalize_text(d) for d in _aggregate(table, rows, sel, agg))
                == gold
            )
            mask_info[mask] = cached
        return cached

    kept_by: dict[tuple[int, Agg], list[tuple[Condition, ...]]] = {}
    n_combos = 0

    def walk(prefix: tuple[Condition, ...], start: int, mask: int) -> None:
        nonlocal n_combos
        n_combos += 1
        for pair in matching_pairs(mask):
            kept_by.setdefault(pair, []).append(prefix)
        if len(prefix) == limits.max_conditions:
            return
        for i in range(start, len(pool)):
            walk(prefix + (pool[i],), i + 1, mask & cond_masks[i])

    walk((), 0, all_rows_mask)

    kept = [
        SqlQuery(sel, agg, conds)
        for sel, agg in allowed
        for conds in kept_by.get((sel, agg), [])
    ]
    return SolutionSet(ex.id, tuple(kept), n_combos * len(allowed))
