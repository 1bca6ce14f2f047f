"""Command-line surface: precompute -> train -> eval -> analyze.

Exit codes: 0 on success, 2 on schema/configuration errors, 3 when training
aborts on a non-finite loss.
"""

from __future__ import annotations

import argparse
import sys

from latentqa.learning import NonFiniteLoss
from latentqa.pipeline import (
    RunConfig,
    SchemaError,
    analyze_files,
    apply_config_entries,
    eval_file,
    load_config,
    precompute_file,
    train_file,
)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_TRAINING = 3

_OVERRIDE_FLAGS = {
    "task": "task",
    "seed": "seed",
    "objective": "objective",
    "tau": "tau",
    "anneal_direction": "anneal_direction",
    "pruning": "pruning",
    "matcher": "matcher",
    "scorer": "scorer",
    "max_steps": "max_steps",
    "learning_rate": "learning_rate",
    "batch_size": "batch_size",
    "max_span_len": "max_span_len",
    "noisy_rank_k": "noisy_rank_k",
    "workers": "workers",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--task", choices=["span", "arithmetic", "sql"])
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument("--seed", type=int)
    p.add_argument("--objective", choices=["first_only", "mml", "hard", "annealed_hard"])
    p.add_argument("--tau", type=int)
    p.add_argument("--anneal-direction", dest="anneal_direction", choices=["literal", "inverted"])
    p.add_argument("--pruning", choices=["exhaustive", "grounded"])
    p.add_argument("--matcher", choices=["exact", "rouge"])
    p.add_argument("--scorer")
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-span-len", dest="max_span_len", type=int)
    p.add_argument("--noisy-rank-k", dest="noisy_rank_k", type=int)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentqa",
        description="Precompute latent solution sets for weakly supervised QA "
        "and train probabilistic scorers with first-only, marginal, or hard updates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("precompute", help="enumerate and filter solution sets")
    p.add_argument("--in", dest="in_path", required=True, help="examples JSONL")
    p.add_argument("--out", dest="out_path", required=True, help="solutions JSONL")
    _add_common(p)

    p = sub.add_parser("train", help="train a scorer on precomputed solutions")
    p.add_argument("--in", dest="in_path", required=True, help="examples JSONL")
    p.add_argument("--solutions", required=True, help="solutions JSONL from precompute")
    p.add_argument("--checkpoint", required=True, help="output checkpoint path")
    p.add_argument("--out", dest="out_path", help="output step-log CSV")
    _add_common(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--in", dest="in_path", required=True, help="examples JSONL")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", dest="out_path", required=True,
                   help="output prefix; writes <out>.jsonl and <out>.csv")
    _add_common(p)

    p = sub.add_parser("analyze", help="bucketed accuracy and sparsity tables")
    p.add_argument("--in", dest="in_path", required=True, nargs="+",
                   help="one or more eval JSONL outputs")
    p.add_argument("--out", dest="out_path", required=True,
                   help="output prefix; writes <out>_breakdown.csv and <out>_sparsity.csv")
    _add_common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    overrides = {}
    for attr, key in _OVERRIDE_FLAGS.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = str(value)
    return apply_config_entries(cfg, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "precompute":
            summary = precompute_file(args.in_path, args.out_path, cfg)
            print(
                "examples={examples} empty_z={empty_z} "
                "mean_z={mean_z:.2f} median_z={median_z:.1f}".format(**summary)
            )
        elif args.command == "train":
            summary = train_file(
                args.in_path, args.solutions, args.checkpoint, args.out_path, cfg
            )
            loss = summary["final_loss"]
            print(
                f"trained={summary['trained']} skipped_empty_z={summary['skipped_empty_z']} "
                f"steps={summary['steps']} final_loss="
                + ("n/a" if loss is None else f"{loss:.6f}")
            )
        elif args.command == "eval":
            summary = eval_file(args.in_path, args.checkpoint, args.out_path, cfg)
            print(
                f"examples={summary['examples']} em={summary['em']:.4f} f1={summary['f1']:.4f}"
            )
        elif args.command == "analyze":
            outputs = analyze_files(args.in_path, args.out_path, cfg)
            print(f"wrote {outputs['breakdown']} and {outputs['sparsity']}")
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except NonFiniteLoss as err:
        print(f"training aborted: {err}", file=sys.stderr)
        return EXIT_TRAINING
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
