"""File formats, configuration, and the precompute/train/eval/analyze flows.

Everything here is deterministic: identical inputs and seeds produce
byte-identical artifacts (JSON with sorted keys, repr floats, atomic
write-then-rename, no timestamps).
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from latentqa import arithmetic, metrics, span_match, sqlgen
from latentqa.core import Document, Example, SolutionSet, TaskKind, tokenize
from latentqa.learning import (
    AnnealDirection,
    FactorizedSpanScorer,
    FactorizedTagScorer,
    LogLinearScorer,
    Objective,
    Scorer,
    TabularScorer,
    TrainConfig,
    TrainInstance,
    make_instance,
    train,
)
from latentqa.metrics import EvalResult, ExampleRecord
from latentqa.span_match import Matcher, MatchKind, Span
from latentqa.sqlgen import EnumLimits, Pruning, SqlQuery


class SchemaError(ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Run configuration


@dataclass(frozen=True)
class RunConfig:
    task: TaskKind = TaskKind.SPAN_EXTRACTION
    matcher: MatchKind = MatchKind.EXACT
    max_span_len: int = 10
    noisy_rank_k: int | None = None
    specials: tuple[float, ...] = arithmetic.DEFAULT_SPECIAL_NUMBERS
    tolerance: float = arithmetic.DEFAULT_TOLERANCE
    allow_copy: bool = False
    max_conditions: int = 3
    max_value_len: int = 8
    pruning: Pruning = Pruning.COLUMN_GROUNDED
    scorer: str = "auto"
    feature_set: str = "default"
    train: TrainConfig = field(default_factory=TrainConfig)
    epsilons: tuple[float, ...] = metrics.DEFAULT_EPSILONS
    z_buckets: tuple[tuple[int, int | None], ...] = metrics.DEFAULT_Z_BUCKETS
    workers: int = 1

    def matcher_config(self) -> Matcher:
        return Matcher(self.matcher, self.max_span_len, self.noisy_rank_k)

    def sql_limits(self) -> EnumLimits:
        return EnumLimits(self.max_conditions, self.max_value_len, self.pruning)


def _parse_buckets(text: str) -> tuple[tuple[int, int | None], ...]:
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        out.append((int(lo), int(hi) if hi.strip() else None))
    return tuple(out)


def _buckets_to_str(buckets) -> str:
    return ",".join(f"{lo}:{'' if hi is None else hi}" for lo, hi in buckets)


_CONFIG_KEYS = {
    "task": lambda v: TaskKind(v),
    "matcher": lambda v: MatchKind(v),
    "max_span_len": int,
    "noisy_rank_k": lambda v: int(v) if v.strip() else None,
    "specials": lambda v: tuple(float(x) for x in v.split(",") if x.strip()),
    "tolerance": float,
    "allow_copy": lambda v: v.lower() in ("1", "true", "yes"),
    "max_conditions": int,
    "max_value_len": int,
    "pruning": lambda v: Pruning(v),
    "scorer": str,
    "feature_set": str,
    "epsilons": lambda v: tuple(float(x) for x in v.split(",") if x.strip()),
    "z_buckets": _parse_buckets,
    "workers": int,
}

_TRAIN_KEYS = {
    "objective": lambda v: Objective(v),
    "tau": int,
    "anneal_direction": lambda v: AnnealDirection(v),
    "learning_rate": float,
    "batch_size": int,
    "max_steps": int,
    "seed": int,
    "gradient_clip": float,
}

_TRAIN_FIELD = {"seed": "rng_seed"}


def apply_config_entries(cfg: RunConfig, entries: dict[str, str]) -> RunConfig:
    """Apply flat key=value settings (config file or CLI overrides)."""
    run_updates = {}
    train_updates = {}
    for key, raw in entries.items():
        if key in _CONFIG_KEYS:
            run_updates[key] = _CONFIG_KEYS[key](raw)
        elif key in _TRAIN_KEYS:
            train_updates[_TRAIN_FIELD.get(key, key)] = _TRAIN_KEYS[key](raw)
        else:
            raise SchemaError(f"unknown configuration key {key!r}")
    if train_updates:
        run_updates["train"] = replace(cfg.train, **train_updates)
    return replace(cfg, **run_updates)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    entries = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SchemaError(f"expected key=value, got {line!r}", line=i)
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return apply_config_entries(cfg, entries)


def config_dict(cfg: RunConfig) -> dict:
    return {
        "task": cfg.task.value,
        "matcher": cfg.matcher.value,
        "max_span_len": cfg.max_span_len,
        "noisy_rank_k": cfg.noisy_rank_k,
        "specials": list(cfg.specials),
        "tolerance": cfg.tolerance,
        "allow_copy": cfg.allow_copy,
        "max_conditions": cfg.max_conditions,
        "max_value_len": cfg.max_value_len,
        "pruning": cfg.pruning.value,
        "scorer": cfg.scorer,
        "feature_set": cfg.feature_set,
        "objective": cfg.train.objective.value,
        "tau": cfg.train.tau,
        "anneal_direction": cfg.train.anneal_direction.value,
        "learning_rate": cfg.train.learning_rate,
        "batch_size": cfg.train.batch_size,
        "max_steps": cfg.train.max_steps,
        "seed": cfg.train.rng_seed,
        "gradient_clip": cfg.train.gradient_clip,
        "epsilons": list(cfg.epsilons),
        "z_buckets": _buckets_to_str(cfg.z_buckets),
        "workers": cfg.workers,
    }


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(config_dict(cfg), sort_keys=True).encode("utf8")
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Example ingestion


def example_from_record(rec: dict, task: TaskKind, line: int) -> Example:
    try:
        ex_id = rec["id"]
        question = rec["question"]
        answers = rec["answers"]
    except (KeyError, TypeError) as err:
        raise SchemaError(f"missing field {err}", line=line) from None
    if not isinstance(ex_id, str) or not isinstance(question, str):
        raise SchemaError("id and question must be strings", line=line)
    if not isinstance(answers, list) or not answers or not all(isinstance(a, str) for a in answers):
        raise SchemaError("answers must be a non-empty list of strings", line=line)
    q_tokens = tokenize(question)
    if not q_tokens:
        raise SchemaError("question has no tokens", line=line)
    try:
        if task is TaskKind.SQL_GENERATION:
            table = rec["table"]
            context = sqlgen.build_table(table["header"], table["rows"])
        else:
            doc_tokens = tokenize(rec["document"])
            if not doc_tokens:
                raise SchemaError("document has no tokens", line=line)
            context = Document(doc_tokens)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise SchemaError(f"bad context: {err}", line=line) from None
    return Example(ex_id, q_tokens, context, tuple(answers), task)


def read_examples(path: str | Path, task: TaskKind) -> list[Example]:
    examples = []
    with open(path, encoding="utf8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as err:
                raise SchemaError(f"invalid JSON: {err.msg}", line=i) from None
            examples.append(example_from_record(rec, task, i))
    return examples


# ---------------------------------------------------------------------------
# Solution serialization


def solution_to_dict(sol) -> dict:
    if isinstance(sol, Span):
        return {"s": sol.s, "e": sol.e}
    if isinstance(sol, arithmetic.Equation):
        def mention(m):
            return {"source": m.source.value, "index": m.index, "value": m.value}

        return {
            "o1": sol.o1.value,
            "n1": mention(sol.n1),
            "o2": sol.o2.value,
            "n2": mention(sol.n2),
        }
    if isinstance(sol, SqlQuery):
        return {
            "sel": sol.sel,
            "agg": sol.agg.value,
            "conds": [
                {"col": c.column, "op": c.op.value, "value_text": c.value_text}
                for c in sol.conditions
            ],
        }
    raise TypeError(f"cannot serialize {type(sol).__name__}")


def solution_from_dict(rec: dict, task: TaskKind):
    if task is TaskKind.SPAN_EXTRACTION:
        return Span(rec["s"], rec["e"])
    if task is TaskKind.ARITHMETIC:
        def mention(m):
            return arithmetic.NumberMention(
                m["value"], arithmetic.MentionSource(m["source"]), m["index"]
            )

        return arithmetic.Equation(
            arithmetic.Operator(rec["o1"]),
            mention(rec["n1"]),
            arithmetic.Operator(rec["o2"]),
            mention(rec["n2"]),
        )
    return SqlQuery(
        rec["sel"],
        sqlgen.Agg(rec["agg"]),
        tuple(
            sqlgen.Condition(c["col"], sqlgen.CondOp(c["op"]), c["value_text"])
            for c in rec["conds"]
        ),
    )


def solution_set_to_line(ss: SolutionSet) -> str:
    rec = {
        "id": ss.example_id,
        "candidate_count": ss.candidate_count,
        "solutions": [solution_to_dict(s) for s in ss.solutions],
    }
    return json.dumps(rec, sort_keys=True)


def read_solution_sets(path: str | Path, task: TaskKind) -> dict[str, SolutionSet]:
    out: dict[str, SolutionSet] = {}
    with open(path, encoding="utf8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                ss = SolutionSet(
                    rec["id"],
                    tuple(solution_from_dict(s, task) for s in rec["solutions"]),
                    rec["candidate_count"],
                )
            except (KeyError, TypeError, ValueError) as err:
                raise SchemaError(f"bad solution record: {err}", line=i) from None
            out[ss.example_id] = ss
    return out


def atomic_write(path: str | Path, data: str | bytes) -> None:
    """Write via a temp file and rename, so failures leave no partial output."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Candidate enumeration and solution sets


def candidates_for(example: Example, cfg: RunConfig) -> tuple:
    """The example's full candidate space under the run's limits."""
    if example.task is TaskKind.SPAN_EXTRACTION:
        bounds = span_match.span_bounds(len(example.context), cfg.max_span_len)
        return tuple(Span(s, e) for s, e in bounds)
    if example.task is TaskKind.ARITHMETIC:
        mentions = arithmetic.extract_numbers(example.question, example.context)
        return tuple(
            arithmetic.enumerate_equations(mentions, cfg.specials, cfg.allow_copy)
        )
    return tuple(sqlgen.enumerate_queries(example.question, example.context, cfg.sql_limits()))


def solution_set_for(example: Example, cfg: RunConfig) -> SolutionSet:
    if example.task is TaskKind.SPAN_EXTRACTION:
        m = cfg.matcher_config()
        if m.noisy_rank_k is not None:
            return span_match.find_noisy_spans(
                example.context, example.answers, m, example_id=example.id
            )
        return span_match.find_matching_spans(
            example.context, example.answers, m, example_id=example.id
        )
    if example.task is TaskKind.ARITHMETIC:
        return arithmetic.arithmetic_solution_set(
            example, cfg.specials, cfg.tolerance, cfg.allow_copy
        )
    return sqlgen.sql_solution_set(example, cfg.sql_limits())


def _precompute_one(args: tuple[Example, RunConfig]) -> str:
    example, cfg = args
    return solution_set_to_line(solution_set_for(example, cfg))


def _map_examples(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=16))


def precompute_file(in_path, out_path, cfg: RunConfig) -> dict:
    """Write one solution-set record per example; returns the run summary."""
    examples = read_examples(in_path, cfg.task)
    lines = _map_examples(_precompute_one, [(ex, cfg) for ex in examples], cfg.workers)
    atomic_write(out_path, "".join(line + "\n" for line in lines))
    sizes = [len(json.loads(line)["solutions"]) for line in lines]
    return {
        "examples": len(examples),
        "empty_z": sum(1 for n in sizes if n == 0),
        "mean_z": float(np.mean(sizes)) if sizes else 0.0,
        "median_z": float(np.median(sizes)) if sizes else 0.0,
    }


# ---------------------------------------------------------------------------
# Scorers and checkpoints


def build_scorer(cfg: RunConfig, max_candidates: int = 0) -> Scorer:
    name = cfg.scorer
    if name == "auto":
        name = {
            TaskKind.SPAN_EXTRACTION: "factorized_span",
            TaskKind.ARITHMETIC: "factorized_tag",
            TaskKind.SQL_GENERATION: "loglinear",
        }[cfg.task]
    if name == "tabular":
        return TabularScorer(max(max_candidates, 1))
    if name == "loglinear":
        return LogLinearScorer(cfg.task, cfg.feature_set)
    if name == "factorized_span":
        return FactorizedSpanScorer(cfg.feature_set)
    if name == "factorized_tag":
        n = len(cfg.specials) + (1 if cfg.allow_copy else 0)
        return FactorizedTagScorer(n, cfg.feature_set)
    raise SchemaError(f"unknown scorer kind {name!r}")


def _scorer_meta(scorer: Scorer, task: TaskKind) -> dict:
    meta = {"kind": scorer.kind, "task": task.value}
    if isinstance(scorer, TabularScorer):
        meta["size"] = scorer.size
    elif isinstance(scorer, LogLinearScorer):
        meta["feature_set"] = scorer.feature_set
    elif isinstance(scorer, FactorizedSpanScorer):
        meta["feature_set"] = scorer.feature_set
    elif isinstance(scorer, FactorizedTagScorer):
        meta["feature_set"] = scorer.feature_set
        meta["n_specials"] = scorer.n_specials
    return meta


def _scorer_from_meta(meta: dict) -> Scorer:
    kind = meta["kind"]
    if kind == "tabular":
        return TabularScorer(meta["size"])
    if kind == "loglinear":
        return LogLinearScorer(TaskKind(meta["task"]), meta["feature_set"])
    if kind == "factorized_span":
        return FactorizedSpanScorer(meta["feature_set"])
    if kind == "factorized_tag":
        return FactorizedTagScorer(meta["n_specials"], meta["feature_set"])
    raise SchemaError(f"unknown scorer kind in checkpoint: {kind!r}")


def write_checkpoint(path, scorer: Scorer, cfg: RunConfig, step: int) -> None:
    """Checkpoint layout: one JSON header line, then little-endian f64 params."""
    header = {
        "format": "latentqa-checkpoint",
        "version": 1,
        "scorer": _scorer_meta(scorer, cfg.task),
        "config_hash": config_hash(cfg),
        "step": step,
        "n_params": int(scorer.params.size),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf8") + b"\n"
    blob += scorer.params.astype("<f8").tobytes()
    atomic_write(path, blob)


def read_checkpoint(path) -> tuple[Scorer, dict]:
    raw = Path(path).read_bytes()
    nl = raw.index(b"\n")
    header = json.loads(raw[:nl].decode("utf8"))
    if header.get("format") != "latentqa-checkpoint":
        raise SchemaError("not a latentqa checkpoint")
    params = np.frombuffer(raw[nl + 1 :], dtype="<f8").astype(np.float64)
    if params.size != header["n_params"]:
        raise SchemaError(
            f"checkpoint holds {params.size} parameters, header says {header['n_params']}"
        )
    scorer = _scorer_from_meta(header["scorer"])
    if scorer.params.size != params.size:
        raise SchemaError("parameter count does not match the scorer kind")
    scorer.params = params
    return scorer, header


# ---------------------------------------------------------------------------
# Training and evaluation flows


def build_instances(
    examples: Sequence[Example], solutions: dict[str, SolutionSet], cfg: RunConfig
) -> tuple[list[TrainInstance], int]:
    """Pair examples with Z indices into their candidate space.

    Examples with empty Z never reach the trainer; the skipped count is
    reported alongside.
    """
    instances = []
    skipped = 0
    for ex in examples:
        ss = solutions.get(ex.id)
        if ss is None:
            raise SchemaError(f"no solutions recorded for example {ex.id!r}")
        if not ss.solutions:
            skipped += 1
            continue
        candidates = candidates_for(ex, cfg)
        instances.append(make_instance(ex, ss.solutions, candidates))
    return instances, skipped


def train_file(examples_path, solutions_path, checkpoint_path, log_path, cfg: RunConfig) -> dict:
    examples = read_examples(examples_path, cfg.task)
    solutions = read_solution_sets(solutions_path, cfg.task)
    instances, skipped = build_instances(examples, solutions, cfg)
    max_cands = max((len(i.candidates) for i in instances), default=1)
    scorer = build_scorer(cfg, max_cands)
    log = train(instances, scorer, cfg.train)
    write_checkpoint(checkpoint_path, scorer, cfg, cfg.train.max_steps)
    if log_path is not None:
        rows = ["step,objective,loss"]
        rows += [f"{r.step},{r.objective},{r.loss!r}" for r in log]
        atomic_write(log_path, "\n".join(rows) + "\n")
    return {
        "examples": len(examples),
        "trained": len(instances),
        "skipped_empty_z": skipped,
        "steps": len(log),
        "final_loss": log[-1].loss if log else None,
    }


def predicted_answer(example: Example, solution) -> str:
    """Execute or extract a predicted solution into an answer string."""
    if isinstance(solution, Span):
        from latentqa.core import detokenize

        return detokenize(example.context.tokens, solution.s, solution.e)
    if isinstance(solution, arithmetic.Equation):
        return sqlgen.format_number(arithmetic.execute_equation(solution))
    return " | ".join(sqlgen.execute_query(example.context, solution))


def _multiset_em(denotation: Sequence[str], golds: Sequence[str]) -> int:
    from latentqa.core import normalize_text

    return int(sorted(map(normalize_text, denotation)) == sorted(map(normalize_text, golds)))


def _eval_one(args: tuple[Example, Scorer, RunConfig]) -> ExampleRecord:
    example, scorer, cfg = args
    candidates = candidates_for(example, cfg)
    z_set = solution_set_for(example, cfg)
    if not candidates:
        return ExampleRecord(example.id, None, "", 0, 0.0, 0.0, len(z_set), {})
    dist = scorer.score_candidates(example, candidates)
    pred_idx = int(np.argmax(dist.log_probs))
    pred = candidates[pred_idx]

    if example.task is TaskKind.SQL_GENERATION:
        denotation = sqlgen.execute_query(example.context, pred)
        answer = " | ".join(denotation)
        em = _multiset_em(denotation, example.answers)
        gold_text = (" ".join(example.answers),)
        f1 = metrics.token_f1(" ".join(denotation), gold_text)
        rl = metrics.rouge_l_answer(" ".join(denotation), gold_text)
    else:
        answer = predicted_answer(example, pred)
        numeric = example.task is TaskKind.ARITHMETIC
        em = metrics.exact_match(answer, example.answers, numeric=numeric)
        f1 = metrics.token_f1(answer, example.answers)
        rl = metrics.rouge_l_answer(answer, example.answers)

    spars: dict[float, float] = {}
    if z_set.solutions:
        index = {c: i for i, c in enumerate(candidates)}
        z_idx = [index[s] for s in z_set.solutions]
        z_probs = np.exp(dist.log_probs[z_idx])
        spars = {eps: metrics.sparsity(z_probs, eps) for eps in cfg.epsilons}
    return ExampleRecord(example.id, pred, answer, em, f1, rl, len(z_set), spars)


def evaluate(examples: Sequence[Example], scorer: Scorer, cfg: RunConfig) -> EvalResult:
    records = _map_examples(
        _eval_one, [(ex, scorer, cfg) for ex in examples], cfg.workers
    )
    return EvalResult(tuple(records), cfg.epsilons)


def record_to_line(rec: ExampleRecord) -> str:
    return json.dumps(
        {
            "id": rec.id,
            "prediction": None if rec.prediction is None else solution_to_dict(rec.prediction),
            "answer": rec.answer_text,
            "em": rec.em,
            "f1": rec.f1,
            "rouge_l": rec.rouge,
            "z_size": rec.z_size,
            "sparsity": {repr(eps): v for eps, v in sorted(rec.sparsity.items())},
        },
        sort_keys=True,
    )


def aggregate_csv(result: EvalResult, cfg: RunConfig) -> str:
    rows = ["metric,key,value"]
    rows.append(f"n_examples,,{len(result)}")
    rows.append(f"em,,{result.mean_em!r}")
    rows.append(f"f1,,{result.mean_f1!r}")
    rows.append(f"rouge_l,,{result.mean_rouge!r}")
    for eps in cfg.epsilons:
        v = result.mean_sparsity(eps)
        rows.append(f"sparsity,{eps!r},{'' if v is None else repr(v)}")
    bucket_rows = metrics.breakdown_by_z(
        [r.z_size for r in result.records],
        [r.em for r in result.records],
        cfg.z_buckets,
    )
    for b in bucket_rows:
        rows.append(f"z_count,{b.label},{b.count}")
        rows.append(f"z_em,{b.label},{b.mean_em!r}")
    return "\n".join(rows) + "\n"


def eval_file(examples_path, checkpoint_path, out_prefix, cfg: RunConfig) -> dict:
    examples = read_examples(examples_path, cfg.task)
    scorer, header = read_checkpoint(checkpoint_path)
    if header["scorer"].get("task") != cfg.task.value:
        raise SchemaError(
            f"checkpoint was trained for task {header['scorer'].get('task')!r}, "
            f"run is {cfg.task.value!r}"
        )
    result = evaluate(examples, scorer, cfg)
    prefix = Path(out_prefix)
    atomic_write(
        prefix.with_suffix(".jsonl"),
        "".join(record_to_line(r) + "\n" for r in result.records),
    )
    atomic_write(prefix.with_suffix(".csv"), aggregate_csv(result, cfg))
    return {"examples": len(result), "em": result.mean_em, "f1": result.mean_f1}


# ---------------------------------------------------------------------------
# Analysis over eval outputs


def read_eval_records(path) -> list[dict]:
    out = []
    with open(path, encoding="utf8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as err:
                raise SchemaError(f"invalid JSON: {err.msg}", line=i) from None
    return out


def analyze_files(eval_paths: Sequence, out_prefix, cfg: RunConfig) -> dict:
    """Join |Z|-bucket accuracy and sparsity-vs-epsilon across eval outputs."""
    names = []
    bucket_tables = []
    sparsity_tables = []
    for path in eval_paths:
        name = Path(path).stem
        names.append(name)
        records = read_eval_records(path)
        rows = metrics.breakdown_by_z(
            [r["z_size"] for r in records],
            [r["em"] for r in records],
            cfg.z_buckets,
        )
        bucket_tables.append(rows)
        eps_means = {}
        for eps in cfg.epsilons:
            vals = [
                r["sparsity"][repr(eps)]
                for r in records
                if repr(eps) in r.get("sparsity", {})
            ]
            eps_means[eps] = float(np.mean(vals)) if vals else None
        sparsity_tables.append(eps_means)

    header = ["bucket"] + [f"{c}_{n}" for n in names for c in ("count", "em")]
    lines = [",".join(header)]
    for bi, (lo, hi) in enumerate(cfg.z_buckets):
        label = bucket_tables[0][bi].label
        cells = [label]
        for rows in bucket_tables:
            cells += [str(rows[bi].count), repr(rows[bi].mean_em)]
        lines.append(",".join(cells))
    breakdown_path = Path(f"{out_prefix}_breakdown.csv")
    atomic_write(breakdown_path, "\n".join(lines) + "\n")

    lines = [",".join(["epsilon"] + [f"sparsity_{n}" for n in names])]
    for eps in cfg.epsilons:
        cells = [repr(eps)]
        for table in sparsity_tables:
            v = table[eps]
            cells.append("" if v is None else repr(v))
        lines.append(",".join(cells))
    sparsity_path = Path(f"{out_prefix}_sparsity.csv")
    atomic_write(sparsity_path, "\n".join(lines) + "\n")
    return {"breakdown": str(breakdown_path), "sparsity": str(sparsity_path)}
