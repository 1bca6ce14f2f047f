import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latentqa.core import Example, TaskKind, canonical_key, tokenize
from latentqa.sqlgen import (
    Agg,
    AggregationTypeError,
    ColumnKind,
    CondOp,
    Condition,
    EnumLimits,
    Pruning,
    SqlQuery,
    build_table,
    enumerate_queries,
    execute_query,
    format_number,
    question_spans,
    sql_solution_set,
)

from oracles import execute_query_ref


def _kinds(table):
    return [k.value for k in table.schema.column_kinds]


class TestBuildTable:
    def test_column_kind_inference(self):
        t = build_table(
            ["name", "score", "year"],
            [["Ann", "3", "1996-97"], ["Bo", "4.5", "1998-99"]],
        )
        assert _kinds(t) == ["text", "numeric", "text"]

    def test_empty_table_is_text(self):
        t = build_table(["a"], [])
        assert _kinds(t) == ["text"]

    def test_row_width_validation(self):
        with pytest.raises(ValueError):
            build_table(["a", "b"], [["only one"]])


class TestQuestionSpans:
    def test_three_tokens_max_two(self):
        spans = question_spans(tokenize("who was that"), 2)
        assert len(spans) == 5

    def test_single_token(self):
        assert len(question_spans(tokenize("who"), 5)) == 1

    @given(st.integers(min_value=1, max_value=8))
    def test_unbounded_count_formula(self, n):
        q = tokenize(" ".join(f"w{i}" for i in range(n)))
        spans = question_spans(q, max_len=n + 3)
        assert len(spans) == n * (n + 1) // 2

    def test_literal_text_preserves_adjacency(self):
        q = tokenize("played in 1996-97 maybe")
        texts = {s.text for s in question_spans(q, 8)}
        assert "1996-97" in texts
        assert "in 1996-97" in texts


class TestExecuteQuery:
    def _table(self):
        return build_table(
            ["player", "position"],
            [["John Long", "Guard"], ["Bob", "Center"]],
        )

    def test_select_where_eq(self):
        q = SqlQuery(0, Agg.NONE, (Condition(1, CondOp.EQ, "guard"),))
        assert execute_query(self._table(), q) == ("John Long",)

    def test_count_all_rows(self):
        q = SqlQuery(0, Agg.COUNT, ())
        assert execute_query(self._table(), q) == ("2",)

    def test_min_text_column_alphabetical(self):
        t = build_table(
            ["player", "position"],
            [["John Long", "Guard"], ["Adam", "Guard"], ["Zed", "Center"]],
        )
        only_guards = (Condition(1, CondOp.EQ, "guard"),)
        assert execute_query(t, SqlQuery(0, Agg.MIN, only_guards)) == ("Adam",)
        one_guard = build_table(
            ["player", "position"], [["John Long", "Guard"], ["Zed", "Center"]]
        )
        assert execute_query(one_guard, SqlQuery(0, Agg.MIN, only_guards)) == ("John Long",)

    def test_numeric_comparisons(self):
        t = build_table(["name", "yards"], [["a", "37"], ["b", "41"], ["c", "x"]])
        lt = SqlQuery(0, Agg.NONE, (Condition(1, CondOp.LT, "40"),))
        gt = SqlQuery(0, Agg.NONE, (Condition(1, CondOp.GT, "40"),))
        assert execute_query(t, lt) == ("a",)
        assert execute_query(t, gt) == ("b",)

    def test_non_numeric_rows_fail_ordered_conditions(self):
        t = build_table(["name", "year"], [["a", "1996-97"]])
        q = SqlQuery(0, Agg.NONE, (Condition(1, CondOp.LT, "1997"),))
        assert execute_query(t, q) == ()

    def test_sum_mean_on_numeric(self):
        t = build_table(["n"], [["2"], ["3"], ["4"]])
        assert execute_query(t, SqlQuery(0, Agg.SUM, ())) == ("9",)
        assert execute_query(t, SqlQuery(0, Agg.MEAN, ())) == ("3",)

    def test_sum_on_text_column_raises(self):
        with pytest.raises(AggregationTypeError):
            execute_query(self._table(), SqlQuery(0, Agg.SUM, ()))

    def test_empty_table_count_zero(self):
        t = build_table(["a"], [])
        assert execute_query(t, SqlQuery(0, Agg.COUNT, ())) == ("0",)
        assert execute_query(t, SqlQuery(0, Agg.NONE, ())) == ()
        assert execute_query(t, SqlQuery(0, Agg.MIN, ())) == ()

    def test_format_number(self):
        assert format_number(9.0) == "9"
        assert format_number(3.5) == "3.5"
        assert format_number(10 / 3) == repr(10 / 3)


def _random_table(rng):
    n_cols = int(rng.integers(1, 5))
    n_rows = int(rng.integers(0, 5))
    headers = [f"col{c}" for c in range(n_cols)]
    numeric_col = rng.random(n_cols) < 0.5
    rows = []
    for _ in range(n_rows):
        row = []
        for c in range(n_cols):
            if numeric_col[c]:
                row.append(str(int(rng.integers(0, 20))))
            else:
                row.append(rng.choice(["red", "blue", "green", "Guard", "x y"]))
        rows.append(row)
    return build_table(headers, rows)


def _random_query(rng, table, value_choices):
    n_cols = table.schema.n_columns
    sel = int(rng.integers(0, n_cols))
    aggs = [
        a
        for a in Agg
        if not (
            a in (Agg.SUM, Agg.MEAN)
            and table.schema.column_kinds[sel] is not ColumnKind.NUMERIC
        )
    ]
    agg = aggs[int(rng.integers(0, len(aggs)))]
    conds = []
    for _ in range(int(rng.integers(0, 4))):
        conds.append(
            Condition(
                int(rng.integers(0, n_cols)),
                list(CondOp)[int(rng.integers(0, 3))],
                value_choices[int(rng.integers(0, len(value_choices)))],
            )
        )
    conds = tuple(sorted(set(conds), key=Condition.sort_key))[:3]
    return SqlQuery(sel, agg, conds)


class TestExecutorAgainstRowScanOracle:
    def test_thousand_random_pairs(self):
        rng = np.random.default_rng(42)
        values = ["red", "blue", "Guard", "3", "7", "15", "x y"]
        checked = 0
        while checked < 1000:
            table = _random_table(rng)
            query = _random_query(rng, table, values)
            got = execute_query(table, query)
            expected = execute_query_ref(
                _kinds(table),
                [list(r) for r in table.data.rows],
                query.sel,
                query.agg.value,
                [(c.column, c.op.value, c.value_text) for c in query.conditions],
            )
            assert got == expected
            checked += 1


class TestEnumerateQueries:
    def _small(self):
        table = build_table(["num"], [["3"], ["7"]])
        q = tokenize("3")
        return q, table

    def test_grammar_count(self):
        q, table = self._small()
        queries = list(enumerate_queries(q, table, EnumLimits(3, 8, Pruning.EXHAUSTIVE)))
        # pool: 1 column x 3 ops x 1 span text; numeric column keeps all 6 aggs
        pool = 3
        combos = sum(math.comb(pool, k) for k in range(4))
        assert len(queries) == 1 * 6 * combos
        zero_cond = [z for z in queries if not z.conditions]
        assert len(zero_cond) == 6

    def test_canonical_emission_order(self, guard_example):
        limits = EnumLimits(2, 3, Pruning.COLUMN_GROUNDED)
        queries = list(
            enumerate_queries(guard_example.question, guard_example.context, limits)
        )
        keys = [canonical_key(z) for z in queries]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_grounded_is_subset_of_exhaustive(self, guard_example):
        q, table = guard_example.question, guard_example.context
        grounded = set(enumerate_queries(q, table, EnumLimits(2, 2, Pruning.COLUMN_GROUNDED)))
        exhaustive = set(enumerate_queries(q, table, EnumLimits(2, 2, Pruning.EXHAUSTIVE)))
        assert grounded <= exhaustive

    def test_sum_mean_skipped_on_text(self):
        table = build_table(["name"], [["ann"]])
        queries = list(enumerate_queries(tokenize("ann"), table, EnumLimits(1, 1, Pruning.EXHAUSTIVE)))
        assert all(z.agg not in (Agg.SUM, Agg.MEAN) for z in queries)

    def test_determinism(self, guard_example):
        limits = EnumLimits(3, 4, Pruning.COLUMN_GROUNDED)
        a = list(enumerate_queries(guard_example.question, guard_example.context, limits))
        b = list(enumerate_queries(guard_example.question, guard_example.context, limits))
        assert a == b


class TestSqlSolutionSet:
    def test_guard_fixture_exactly_five(self, guard_example):
        for pruning in (Pruning.COLUMN_GROUNDED, Pruning.EXHAUSTIVE):
            ss = sql_solution_set(guard_example, EnumLimits(3, 4, pruning))
            got = {
                (
                    z.sel,
                    z.agg.value,
                    tuple((c.column, c.op.value, c.value_text) for c in z.conditions),
                )
                for z in ss.solutions
            }
            guard = (1, "=", "guard")
            years = (2, "=", "1996-97")
            assert got == {
                (0, "none", (guard, years)),
                (0, "max", (guard, years)),
                (0, "min", (guard,)),
                (0, "min", (years,)),
                (0, "min", (guard, years)),
            }

    def test_empty_table_count_matches_zero(self):
        ex = Example(
            "empty",
            tokenize("how many rows"),
            build_table(["a"], []),
            ("0",),
            TaskKind.SQL_GENERATION,
        )
        ss = sql_solution_set(ex, EnumLimits(1, 1, Pruning.EXHAUSTIVE))
        assert SqlQuery(0, Agg.COUNT, ()) in ss.solutions

    def test_exhaustive_equals_bruteforce_filter(self):
        rng = np.random.default_rng(3)
        for trial in range(12):
            table = _random_table(rng)
            words = ["red", "blue", "3", "7", "Guard"]
            q_text = " ".join(rng.choice(words, size=rng.integers(1, 4)))
            gold_pool = [c for row in table.data.rows for c in row] + ["1", "3"]
            gold = (gold_pool[int(rng.integers(0, len(gold_pool)))],)
            ex = Example(
                f"r{trial}", tokenize(q_text), table, gold, TaskKind.SQL_GENERATION
            )
            limits = EnumLimits(2, 2, Pruning.EXHAUSTIVE)
            ss = sql_solution_set(ex, limits)
            from latentqa.core import normalize_text

            expected = []
            total = 0
            gold_norm = sorted(normalize_text(g) for g in gold)
            for z in enumerate_queries(ex.question, table, limits):
                total += 1
                den = execute_query(table, z)
                if sorted(normalize_text(d) for d in den) == gold_norm:
                    expected.append(z)
            assert list(ss.solutions) == expected
            assert ss.candidate_count == total

    def test_grounded_subset_and_small_equality(self, guard_example):
        grounded = sql_solution_set(guard_example, EnumLimits(3, 4, Pruning.COLUMN_GROUNDED))
        exhaustive = sql_solution_set(guard_example, EnumLimits(3, 4, Pruning.EXHAUSTIVE))
        assert set(grounded.solutions) <= set(exhaustive.solutions)
        assert grounded.solutions == exhaustive.solutions
