"""Experiment orchestration: multi-run evaluation, ablation sweeps, early
detection, and explanation passes.

A run is the unit of randomness. Run ``i`` uses seed ``config.seed + i`` for
its split, parameter init, and training streams, while the dataset itself is
fixed by ``config.seed`` alone, so runs differ only in split and training
randomness, not in the underlying data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import VARIANTS, ExperimentConfig
from .dataset import (
    PreparedDataset,
    PreparedExample,
    apply_normalization,
    compute_normalization,
    load_raw_dataset,
    prepare_dataset,
    split_dataset,
)
from .embeddings import load_embeddings
from .explain import Explanation, build_explanation
from .graphs import truncate_by_deadline
from .metrics import Metrics, RunAggregate, aggregate_runs
from .model import MVANModel
from .rng import RngTree
from .synthetic import gen_synthetic
from .train import TrainedModel, evaluate_model, train_model

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


def prepare_experiment(config: ExperimentConfig) -> PreparedDataset:
    """Load (or generate) the raw dataset and run the preparation pipeline."""
    config.validate()
    if config.data is not None:
        raw = load_raw_dataset(
            config.data.tweets,
            config.data.retweets,
            config.data.users,
            builder=config.model.builder,
        )
    else:
        raw = gen_synthetic(
            replace(config.synthetic, builder=config.model.builder), config.seed
        ).dataset
    return prepare_dataset(raw, vocab_cap=config.model.vocab_cap, max_len=config.model.max_len)


@dataclass
class RunResult:
    run_index: int
    seed: int
    metrics: Metrics
    trained: TrainedModel
    test_examples: List[PreparedExample]  # normalized, for post-hoc passes


@dataclass
class ExperimentResult:
    runs: List[RunResult]
    aggregates: Optional[Dict[str, RunAggregate]]  # None when n_runs < 2


def _split_and_normalize(
    prep: PreparedDataset, split_ratio: float, seed: int
) -> Tuple[List[PreparedExample], List[PreparedExample]]:
    train, test = split_dataset(prep, split_ratio, seed)
    stats = compute_normalization(train)
    return apply_normalization(train, stats), apply_normalization(test, stats)


def run_once(
    config: ExperimentConfig,
    prep: PreparedDataset,
    run_index: int,
    variant: Optional[str] = None,
) -> RunResult:
    seed = config.seed + run_index
    model_config = config.model if variant is None else replace(config.model, variant=variant)
    train_ex, test_ex = _split_and_normalize(prep, config.split_ratio, seed)

    pretrained = None
    if config.data is not None and config.data.embeddings and model_config.uses_text:
        pretrained = load_embeddings(
            config.data.embeddings,
            prep.vocab,
            model_config.embed_dim,
            RngTree(seed).stream("embeddings"),
        ).matrix

    model = MVANModel.build(
        model_config, len(prep.vocab), RngTree(seed).child("model"), pretrained
    )
    trained = train_model(model, train_ex, config.trainer, RngTree(seed).child("train"))
    return RunResult(
        run_index=run_index,
        seed=seed,
        metrics=evaluate_model(model, test_ex),
        trained=trained,
        test_examples=test_ex,
    )


def _aggregate(runs: Sequence[RunResult]) -> Optional[Dict[str, RunAggregate]]:
    if len(runs) < 2:
        return None
    return {
        name: aggregate_runs([getattr(r.metrics, name) for r in runs])
        for name in METRIC_NAMES
    }


def evaluate_runs(
    config: ExperimentConfig,
    prep: Optional[PreparedDataset] = None,
    variant: Optional[str] = None,
) -> ExperimentResult:
    if prep is None:
        prep = prepare_experiment(config)
    runs = [run_once(config, prep, i, variant) for i in range(config.n_runs)]
    return ExperimentResult(runs=runs, aggregates=_aggregate(runs))


def ablate(config: ExperimentConfig) -> Dict[str, ExperimentResult]:
    """Evaluate every variant on the same prepared dataset; keys are the
    canonical variant names in their fixed order."""
    prep = prepare_experiment(config)
    return {v: evaluate_runs(config, prep, variant=v) for v in VARIANTS}


def truncate_examples(
    examples: Sequence[PreparedExample], fraction: float
) -> List[PreparedExample]:
    return [replace(ex, graph=truncate_by_deadline(ex.graph, fraction)) for ex in examples]


@dataclass
class EarlyDetectionResult:
    fractions: Tuple[float, ...]  # ascending
    accuracy: Dict[float, float]  # mean over runs
    per_fraction: Dict[float, List[Metrics]]  # per-run metrics

    def curve(self) -> List[Tuple[float, float]]:
        return [(f, self.accuracy[f]) for f in self.fractions]


def early_detection_schedule(config: ExperimentConfig) -> EarlyDetectionResult:
    """Accuracy as a function of the kept fraction of earliest retweeters.

    In the default ``test_only`` mode each run trains once on full graphs and
    is evaluated against test graphs truncated to each fraction. In
    ``train_and_test`` mode the training graphs are truncated too, which
    means one training per fraction per run.
    """
    config.validate()
    if config.model.variant == "TSAN":
        raise ValueError("early detection varies the graphs; TSAN ignores them")
    fractions = tuple(sorted(set(config.early_detection.fractions)))
    prep = prepare_experiment(config)
    per_fraction: Dict[float, List[Metrics]] = {f: [] for f in fractions}

    if config.early_detection.mode == "test_only":
        for i in range(config.n_runs):
            result = run_once(config, prep, i)
            for f in fractions:
                truncated = truncate_examples(result.test_examples, f)
                per_fraction[f].append(evaluate_model(result.trained.model, truncated))
    else:
        for f in fractions:
            for i in range(config.n_runs):
                seed = config.seed + i
                train_ex, test_ex = _split_and_normalize(prep, config.split_ratio, seed)
                train_ex = truncate_examples(train_ex, f)
                model = MVANModel.build(
                    config.model, len(prep.vocab), RngTree(seed).child("model")
                )
                train_model(model, train_ex, config.trainer, RngTree(seed).child("train"))
                per_fraction[f].append(
                    evaluate_model(model, truncate_examples(test_ex, f))
                )

    accuracy = {
        f: float(np.mean([m.accuracy for m in per_fraction[f]])) for f in fractions
    }
    return EarlyDetectionResult(
        fractions=fractions, accuracy=accuracy, per_fraction=per_fraction
    )


@dataclass
class ExplainResult:
    run: RunResult
    explanations: List[Explanation]
    edge_entries: List[Tuple[str, int, int, str, str, float]]


def explain_run(config: ExperimentConfig) -> ExplainResult:
    """Train one run (run index 0) and explain every test example."""
    prep = prepare_experiment(config)
    result = run_once(config, prep, 0)
    explanations: List[Explanation] = []
    edge_entries: List[Tuple[str, int, int, str, str, float]] = []
    for ex in result.test_examples:
        pred = result.trained.model.predict(ex)
        explanations.append(build_explanation(ex, pred))
        for layer, head, src, dst, coeff in pred.edge_rows:
            edge_entries.append(
                (ex.tweet_id, layer, head, ex.graph.user_ids[src], ex.graph.user_ids[dst], coeff)
            )
    return ExplainResult(run=result, explanations=explanations, edge_entries=edge_entries)
