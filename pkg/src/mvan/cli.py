"""Command-line entry point.

Every command takes an optional INI config file plus positional
``section.key=value`` overrides, writes artifacts into the experiment's
output directory, and echoes the fully resolved configuration next to them
as ``resolved_config.ini``. Exit codes: 0 success, 1 runtime failure, 2 bad
configuration or usage.

Commands:
    prepare        validate + tokenize the dataset, write a canonical cache
    train          one training run: checkpoint + history CSV
    evaluate       n_runs trainings: per-run metrics, aggregate when n_runs>1
    ablate         evaluate every model variant, one summary row each
    early-detect   accuracy vs kept fraction of earliest retweeters
    explain        attention explanations for the test split of one run
    gen-synthetic  write a generated dataset (+ ground truth) to disk
    selfcheck      run the built-in gradient/oracle verification suites
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .checkpoint import save_checkpoint
from .config import (
    ConfigError,
    ExperimentConfig,
    load_config,
    resolved_ini,
    variant_display_name,
)
from .dataset import write_dataset_files
from .experiments import (
    VARIANTS,
    ablate,
    early_detection_schedule,
    evaluate_runs,
    explain_run,
    prepare_experiment,
    run_once,
)
from .metrics import format_interval
from .reports import (
    format_float,
    to_json,
    write_aggregate_csv,
    write_curve_csv,
    write_edge_coeffs_csv,
    write_explanations_jsonl,
    write_history_csv,
    write_metrics_json,
    write_text,
    write_top_users_csv,
)
from .selfcheck import run_selfcheck
from .synthetic import gen_synthetic


def _echo_config(config: ExperimentConfig, out: Path) -> None:
    write_text(out / "resolved_config.ini", resolved_ini(config) + "\n")


def _load_raw(config: ExperimentConfig):
    from .dataset import load_raw_dataset

    if config.data is not None:
        return load_raw_dataset(
            config.data.tweets,
            config.data.retweets,
            config.data.users,
            builder=config.model.builder,
        )
    return gen_synthetic(
        replace(config.synthetic, builder=config.model.builder), config.seed
    ).dataset


def cmd_prepare(config: ExperimentConfig) -> int:
    out = Path(config.output_dir)
    raw = _load_raw(config)
    prep = prepare_experiment(config)
    cache = out / "prepared"
    write_dataset_files(raw, cache)
    write_text(cache / "vocab.txt", "\n".join(prep.vocab.ordered_tokens) + "\n")
    n_fake = sum(ex.label for ex in prep.examples)
    meta = {
        "schema_version": 1,
        "n_examples": len(prep.examples),
        "n_fake": n_fake,
        "n_true": len(prep.examples) - n_fake,
        "vocab_size": len(prep.vocab),
        "max_len": prep.max_len,
        "builder": prep.builder,
    }
    write_text(cache / "meta.json", to_json(meta) + "\n")
    _echo_config(config, out)
    print(f"prepared {meta['n_examples']} examples, vocab size {meta['vocab_size']}")
    return 0


def cmd_train(config: ExperimentConfig) -> int:
    out = Path(config.output_dir)
    prep = prepare_experiment(config)
    result = run_once(config, prep, 0)
    save_checkpoint(out / "checkpoint.ckpt", result.trained.parameters)
    write_history_csv(result.trained.history, out / "history.csv")
    write_metrics_json(result.metrics, out / "metrics.json")
    _echo_config(config, out)
    print(
        f"trained {variant_display_name(config.model.variant)} for "
        f"{len(result.trained.history)} epochs (best epoch {result.trained.best_epoch}); "
        f"test accuracy {format_float(result.metrics.accuracy)}"
    )
    return 0


def cmd_evaluate(config: ExperimentConfig) -> int:
    out = Path(config.output_dir)
    result = evaluate_runs(config)
    for run in result.runs:
        write_metrics_json(run.metrics, out / f"metrics_run{run.run_index}.json")
        print(f"run {run.run_index} (seed {run.seed}): accuracy {format_float(run.metrics.accuracy)}")
    if result.aggregates is not None:
        write_aggregate_csv(result.aggregates, out / "aggregate.csv")
        acc = result.aggregates["accuracy"]
        print(f"accuracy over {acc.n_runs} runs: {format_interval(acc.mean, acc.half_widths[0.95])}")
    _echo_config(config, out)
    return 0


def cmd_ablate(config: ExperimentConfig) -> int:
    out = Path(config.output_dir)
    results = ablate(config)
    lines = ["variant,n_runs,accuracy,precision,recall,f1"]
    for variant in VARIANTS:
        runs = results[variant].runs
        means = {
            name: sum(getattr(r.metrics, name) for r in runs) / len(runs)
            for name in ("accuracy", "precision", "recall", "f1")
        }
        row = (
            f"{variant_display_name(variant)},{len(runs)},"
            f"{format_float(means['accuracy'])},{format_float(means['precision'])},"
            f"{format_float(means['recall'])},{format_float(means['f1'])}"
        )
        lines.append(row)
        print(row)
    write_text(out / "ablation.csv", "\n".join(lines) + "\n")
    _echo_config(config, out)
    return 0


def cmd_early_detect(config: ExperimentConfig) -> int:
    out = Path(config.output_dir)
    result = early_detection_schedule(config)
    write_curve_csv(result.curve(), out / "curve.csv")
    detail = {
        "schema_version": 1,
        "mode": config.early_detection.mode,
        "points": [
            {"fraction": f, "accuracy": result.accuracy[f]} for f in result.fractions
        ],
    }
    write_text(out / "early_detection.json", to_json(detail) + "\n")
    for f in result.fractions:
        print(f"fraction {format_float(f)}: accuracy {format_float(result.accuracy[f])}")
    _echo_config(config, out)
    return 0


def cmd_explain(config: ExperimentConfig) -> int:
    out = Path(config.output_dir)
    result = explain_run(config)
    write_explanations_jsonl(result.explanations, out / "explanations.jsonl")
    if any(e.users for e in result.explanations):
        write_top_users_csv(result.explanations, config.explain.top_k, out / "top_users.csv")
    if result.edge_entries:
        write_edge_coeffs_csv(result.edge_entries, out / "edges.csv")
    _echo_config(config, out)
    print(f"explained {len(result.explanations)} test examples")
    return 0


def cmd_gen_synthetic(config: ExperimentConfig) -> int:
    if config.synthetic is None:
        raise ConfigError("gen-synthetic needs a [synthetic] section, not [data]")
    out = Path(config.output_dir)
    data = gen_synthetic(
        replace(config.synthetic, builder=config.model.builder), config.seed
    )
    write_dataset_files(data.dataset, out)
    write_text(out / "truth.json", to_json(data.truth) + "\n")
    _echo_config(config, out)
    print(f"wrote {len(data.dataset.examples)} examples to {out}")
    return 0


def cmd_selfcheck(config: ExperimentConfig) -> int:
    return 0 if run_selfcheck() else 1


_COMMANDS = {
    "prepare": cmd_prepare,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "early-detect": cmd_early_detect,
    "explain": cmd_explain,
    "gen-synthetic": cmd_gen_synthetic,
    "selfcheck": cmd_selfcheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvan",
        description="Multi-view fake news detection: training, evaluation, and explanation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} step")
        p.add_argument("-c", "--config", default=None, help="INI config file")
        p.add_argument(
            "overrides",
            nargs="*",
            metavar="section.key=value",
            help="override individual config values",
        )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure -> exit 1 with the message
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
