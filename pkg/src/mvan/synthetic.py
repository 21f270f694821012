"""Synthetic tweet-cascade generator with plantable, label-correlated signals.

Two independent signal channels, each controlled by a strength in [0, 1]:

- text: with probability ``text_signal_strength`` a label-specific cue token
  is inserted into the tweet text (fake and true news get different cues;
  neither cue ever appears in background text).
- graph: with probability ``graph_signal_strength`` the earliest retweeters
  (up to two) get extreme mirror-image profiles: for fake news, young
  throwaway accounts (unverified, default profile, almost no followers); for
  true news, established accounts (verified, rich profile, many followers).

At strength 0 the channel carries no label information, so a dataset at
(0, 0) is pure noise and no classifier can beat chance in expectation. The
generator also returns ground truth (which cue, which users were planted) so
explanation quality can be scored against construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .dataset import Example, RawDataset, SourceTweet
from .graphs import RetweetRecord, UserFeatures, build_propagation_graph
from .rng import RngTree

CUE_FAKE = "cuefake"
CUE_TRUE = "cuetrue"


@dataclass(frozen=True)
class SyntheticConfig:
    n_examples: int = 200
    text_signal_strength: float = 0.9
    graph_signal_strength: float = 0.9
    vocab_size: int = 100
    mean_retweets: float = 8.0
    builder: str = "chain(1)"

    def validate(self) -> None:
        if self.n_examples < 2 or self.n_examples % 2 != 0:
            raise ValueError(
                "n_examples must be an even number >= 2 (labels are balanced), "
                f"got {self.n_examples}"
            )
        for name in ("text_signal_strength", "graph_signal_strength"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.vocab_size < 2:
            raise ValueError(f"vocab_size must be >= 2, got {self.vocab_size}")
        if self.mean_retweets <= 0:
            raise ValueError(f"mean_retweets must be positive, got {self.mean_retweets}")


@dataclass
class SyntheticData:
    dataset: RawDataset
    truth: dict


# Baseline profile draws are label-independent; only planted users differ.
_BINARY_RATES = {
    "user_contributors_enabled": 0.05,
    "user_default_profile": 0.40,
    "user_default_profile_image": 0.10,
    "user_follow_request_sent": 0.02,
    "user_following": 0.10,
    "user_geo_enabled": 0.40,
    "user_has_extended_profile": 0.30,
    "user_profile_use_background_image": 0.60,
    "user_protected": 0.05,
    "user_verified": 0.10,
}
_COUNT_LOGNORMAL = {
    "user_favourites_count": (3.5, 1.0),
    "user_followers_count": (4.5, 1.2),
    "user_friends_count": (4.0, 1.0),
    "user_listed_count": (1.0, 1.0),
    "user_statuses_count": (5.0, 1.2),
}


def _baseline_profile(rng: np.random.Generator) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for name, rate in _BINARY_RATES.items():
        out[name] = int(rng.random() < rate)
    for name, (mu, sigma) in _COUNT_LOGNORMAL.items():
        out[name] = int(rng.lognormal(mu, sigma))
    return out


def _planted_profile(rng: np.random.Generator, label: int) -> Dict[str, int]:
    if label == 1:  # fake news spreader: fresh throwaway account
        return {
            "user_contributors_enabled": 0,
            "user_default_profile": 1,
            "user_default_profile_image": 1,
            "user_favourites_count": int(rng.integers(0, 5)),
            "user_follow_request_sent": 0,
            "user_followers_count": int(rng.integers(0, 3)),
            "user_following": 0,
            "user_friends_count": int(rng.integers(0, 10)),
            "user_geo_enabled": 0,
            "user_has_extended_profile": 0,
            "user_listed_count": 0,
            "user_profile_use_background_image": 0,
            "user_protected": 0,
            "user_statuses_count": int(rng.integers(0, 5)),
            "user_verified": 0,
        }
    return {  # true news spreader: established, certified account
        "user_contributors_enabled": 1,
        "user_default_profile": 0,
        "user_default_profile_image": 0,
        "user_favourites_count": int(rng.integers(1000, 5000)),
        "user_follow_request_sent": 1,
        "user_followers_count": int(rng.integers(5000, 20000)),
        "user_following": 1,
        "user_friends_count": int(rng.integers(500, 2000)),
        "user_geo_enabled": 1,
        "user_has_extended_profile": 1,
        "user_listed_count": int(rng.integers(200, 1000)),
        "user_profile_use_background_image": 1,
        "user_protected": 1,
        "user_statuses_count": int(rng.integers(10000, 50000)),
        "user_verified": 1,
    }


def gen_synthetic(config: SyntheticConfig, seed: int) -> SyntheticData:
    """Generate a balanced labeled dataset; even indices are true news, odd
    are fake. Deterministic per (config, seed)."""
    config.validate()
    root = RngTree(seed).child("synthetic")
    background = [f"w{i:03d}" for i in range(config.vocab_size)]

    examples: List[Example] = []
    users: Dict[str, UserFeatures] = {}
    truth_examples: Dict[str, dict] = {}
    for i in range(config.n_examples):
        label = i % 2  # 0 true, 1 fake
        tweet_id = f"t{i:05d}"
        rng = root.stream(f"example/{i:05d}")

        n_words = int(rng.integers(6, 14))
        words = [background[int(w)] for w in rng.integers(0, config.vocab_size, n_words)]
        cue_inserted = bool(rng.random() < config.text_signal_strength)
        if cue_inserted:
            cue = CUE_FAKE if label == 1 else CUE_TRUE
            words.insert(int(rng.integers(0, len(words) + 1)), cue)
        tweet = SourceTweet(id=tweet_id, text=" ".join(words), label=label)

        n_nodes = max(2, int(rng.poisson(config.mean_retweets)))
        planted = bool(rng.random() < config.graph_signal_strength)
        planted_users: List[str] = []
        records = []
        for j in range(n_nodes):
            user_id = f"u{i:05d}_{j:03d}"
            parent = None if j == 0 else f"u{i:05d}_{int(rng.integers(0, j)):03d}"
            records.append(
                RetweetRecord(
                    tweet_id=tweet_id, user_id=user_id, order=j, parent_user_id=parent
                )
            )
            if planted and j < 2:
                profile = _planted_profile(rng, label)
                planted_users.append(user_id)
            else:
                profile = _baseline_profile(rng)
            users[user_id] = UserFeatures.from_mapping(profile)

        graph = build_propagation_graph(records, config.builder, users)
        examples.append(Example(tweet=tweet, graph=graph))
        truth_examples[tweet_id] = {
            "label": label,
            "cue_inserted": cue_inserted,
            "planted_users": planted_users,
        }

    truth = {
        "cue_tokens": {"fake": CUE_FAKE, "true": CUE_TRUE},
        "examples": truth_examples,
    }
    return SyntheticData(dataset=RawDataset(examples=examples, users=users), truth=truth)
