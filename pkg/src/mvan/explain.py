"""Attention-based explanations.

For each prediction the model exposes one weight per word (from the text
attention) and one received-attention score per retweet user (the sum of
attention coefficients the user's node receives from other nodes across all
layers and heads). This module packages them into per-example explanation
records, ranks users, and summarizes weight distributions over a corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .dataset import PreparedExample
from .graphs import FEATURE_NAMES
from .model import PredictionOutput

BIN_EDGES = np.linspace(0.0, 1.0, 11)


@dataclass(frozen=True)
class UserReport:
    user_id: str
    order: int
    received: float
    features: Dict[str, float]


@dataclass(frozen=True)
class Explanation:
    tweet_id: str
    true_label: int
    predicted_label: int
    probabilities: np.ndarray  # (2,)
    tokens: List[str]
    word_weights: np.ndarray  # one weight per token
    users: List[UserReport]  # in retweet order; empty when the model has no GAT


def build_explanation(example: PreparedExample, prediction: PredictionOutput) -> Explanation:
    """Pair a prediction's attention outputs with the example's tokens and
    user metadata."""
    n_tokens = len(example.tokens)
    if prediction.word_weights is not None:
        weights = prediction.word_weights[:n_tokens].copy()
    else:
        weights = np.zeros(0)
        n_tokens = 0
    users: List[UserReport] = []
    if prediction.received is not None:
        g = example.graph
        for i in range(g.n_nodes):
            users.append(
                UserReport(
                    user_id=g.user_ids[i],
                    order=int(g.orders[i]),
                    received=float(prediction.received[i]),
                    features=dict(zip(FEATURE_NAMES, (float(v) for v in g.features[i]))),
                )
            )
    return Explanation(
        tweet_id=example.tweet_id,
        true_label=example.label,
        predicted_label=prediction.label,
        probabilities=prediction.probabilities.copy(),
        tokens=list(example.tokens[:n_tokens]) if prediction.word_weights is not None else [],
        word_weights=weights,
        users=users,
    )


def top_users(explanation: Explanation, k: int) -> List[UserReport]:
    """Users ranked by received attention, highest first; equal scores go to
    the earlier retweeter."""
    if not explanation.users:
        raise ValueError(f"explanation for {explanation.tweet_id} has no user scores")
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(explanation.users, key=lambda u: (-u.received, u.order))
    return ranked[:k]


@dataclass(frozen=True)
class WeightDistribution:
    bin_edges: np.ndarray  # 11 edges for 10 fixed-width bins
    counts: np.ndarray  # (10,) int
    proportions: np.ndarray  # counts / n_weights
    mean_weight: float
    fraction_exactly_one: float  # share of weights equal to 1 (single-word tweets)
    n_weights: int


def word_weight_distribution(
    explanations: Sequence[Explanation],
    label_filter: Optional[int] = None,
    by: str = "true",
) -> WeightDistribution:
    """Histogram of per-word attention weights over fixed bins [0, 0.1), ...,
    [0.9, 1.0]. ``label_filter`` keeps only explanations whose ``by``
    ("true" or "predicted") label matches."""
    if by not in ("true", "predicted"):
        raise ValueError(f"by must be 'true' or 'predicted', got {by!r}")
    selected = []
    for ex in explanations:
        label = ex.true_label if by == "true" else ex.predicted_label
        if label_filter is None or label == label_filter:
            selected.append(ex.word_weights)
    if not selected or sum(w.size for w in selected) == 0:
        raise ValueError("no word weights to summarize after filtering")
    weights = np.concatenate(selected)
    counts, _ = np.histogram(weights, bins=BIN_EDGES)
    n = weights.size
    return WeightDistribution(
        bin_edges=BIN_EDGES.copy(),
        counts=counts,
        proportions=counts / n,
        mean_weight=float(weights.mean()),
        fraction_exactly_one=float(np.mean(weights >= 1.0 - 1e-9)),
        n_weights=n,
    )


def token_mean_weight(explanations: Sequence[Explanation], token: str) -> float:
    """Mean attention weight the given token receives over all its
    occurrences."""
    values: List[float] = []
    for ex in explanations:
        for tok, w in zip(ex.tokens, ex.word_weights):
            if tok == token:
                values.append(float(w))
    if not values:
        raise ValueError(f"token {token!r} appears in no explanation")
    return float(np.mean(values))
