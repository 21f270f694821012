"""Dataset assembly: file ingestion, preparation, splits, normalization.

File formats (all UTF-8 JSON lines, unknown keys ignored):

- ``tweets.jsonl``    {"id": str, "text": str, "label": "true"|"fake"}
- ``retweets.jsonl``  {"tweet_id": str, "user_id": str, "order": int,
                       "parent_user_id": str|null (optional)}
- ``users.jsonl``     {"user_id": str, "features": {15 named fields, nullable}}

Labels map to integers: true news = 0, fake news = 1. Fake is the positive
class everywhere downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .graphs import (
    COUNT_FEATURE_INDICES,
    FEATURE_NAMES,
    PropagationGraph,
    RetweetRecord,
    UserFeatures,
    build_propagation_graph,
    impute_user_features,
)
from .rng import RngTree
from .text import Vocabulary, build_vocab, encode_tweet, tokenize

LABEL_NAMES = ("true", "fake")
TRUE_NEWS, FAKE_NEWS = 0, 1


class DatasetFormatError(Exception):
    """Malformed input files or inconsistent dataset contents."""


@dataclass(frozen=True)
class SourceTweet:
    id: str
    text: str
    label: int  # 0 = true news, 1 = fake news


@dataclass
class Example:
    tweet: SourceTweet
    graph: PropagationGraph


@dataclass
class RawDataset:
    """Ingested but untokenized examples; graph features not yet imputed."""

    examples: List[Example]
    users: Dict[str, UserFeatures] = field(default_factory=dict)


@dataclass
class PreparedExample:
    tweet_id: str
    label: int
    token_ids: np.ndarray  # (max_len,) int64
    true_length: int
    tokens: List[str]  # the encoded (possibly truncated) tokens, for reports
    graph: PropagationGraph  # imputed features, raw count scales


@dataclass
class PreparedDataset:
    examples: List[PreparedExample]
    vocab: Vocabulary
    max_len: int
    builder: str


@dataclass(frozen=True)
class NormalizationStats:
    """Train-split population mean/std for the count-typed feature columns."""

    means: np.ndarray  # (len(COUNT_FEATURE_INDICES),)
    stds: np.ndarray

    def to_jsonable(self) -> dict:
        return {
            "columns": [FEATURE_NAMES[i] for i in COUNT_FEATURE_INDICES],
            "means": [float(m) for m in self.means],
            "stds": [float(s) for s in self.stds],
        }


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def _read_jsonl(path: Path) -> Iterable[Tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if not isinstance(obj, dict):
                raise DatasetFormatError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def _require(obj: dict, key: str, path: Path, lineno: int):
    if key not in obj:
        raise DatasetFormatError(f"{path}:{lineno}: missing required key {key!r}")
    return obj[key]


def load_tweets(path) -> List[SourceTweet]:
    path = Path(path)
    tweets = []
    seen = set()
    for lineno, obj in _read_jsonl(path):
        tweet_id = str(_require(obj, "id", path, lineno))
        if not tweet_id:
            raise DatasetFormatError(f"{path}:{lineno}: empty tweet id")
        if tweet_id in seen:
            raise DatasetFormatError(f"{path}:{lineno}: duplicate tweet id {tweet_id!r}")
        seen.add(tweet_id)
        label_str = _require(obj, "label", path, lineno)
        if label_str not in LABEL_NAMES:
            raise DatasetFormatError(
                f"{path}:{lineno}: label must be 'true' or 'fake', got {label_str!r}"
            )
        tweets.append(
            SourceTweet(
                id=tweet_id,
                text=str(_require(obj, "text", path, lineno)),
                label=LABEL_NAMES.index(label_str),
            )
        )
    return tweets


def load_retweets(path) -> Dict[str, List[RetweetRecord]]:
    path = Path(path)
    by_tweet: Dict[str, List[RetweetRecord]] = {}
    for lineno, obj in _read_jsonl(path):
        order = _require(obj, "order", path, lineno)
        if not isinstance(order, int) or isinstance(order, bool) or order < 0:
            raise DatasetFormatError(
                f"{path}:{lineno}: order must be a non-negative integer, got {order!r}"
            )
        parent = obj.get("parent_user_id")
        rec = RetweetRecord(
            tweet_id=str(_require(obj, "tweet_id", path, lineno)),
            user_id=str(_require(obj, "user_id", path, lineno)),
            order=order,
            parent_user_id=None if parent is None else str(parent),
        )
        by_tweet.setdefault(rec.tweet_id, []).append(rec)
    return by_tweet


def load_users(path) -> Dict[str, UserFeatures]:
    path = Path(path)
    users: Dict[str, UserFeatures] = {}
    for lineno, obj in _read_jsonl(path):
        user_id = str(_require(obj, "user_id", path, lineno))
        features = _require(obj, "features", path, lineno)
        if not isinstance(features, dict):
            raise DatasetFormatError(f"{path}:{lineno}: features must be an object")
        users[user_id] = UserFeatures.from_mapping(features)
    return users


def build_raw_dataset(
    tweets: Sequence[SourceTweet],
    retweets: Dict[str, List[RetweetRecord]],
    users: Dict[str, UserFeatures],
    builder: str,
) -> RawDataset:
    """Pair every tweet with its propagation graph. A tweet without retweet
    records cannot form a graph and is an input error."""
    examples = []
    for tw in tweets:
        records = retweets.get(tw.id)
        if not records:
            raise DatasetFormatError(f"tweet {tw.id!r} has no retweet records")
        graph = build_propagation_graph(records, builder, users)
        examples.append(Example(tweet=tw, graph=graph))
    return RawDataset(examples=examples, users=dict(users))


def load_raw_dataset(tweets_path, retweets_path, users_path, builder: str) -> RawDataset:
    return build_raw_dataset(
        load_tweets(tweets_path),
        load_retweets(retweets_path),
        load_users(users_path),
        builder,
    )


# ---------------------------------------------------------------------------
# Writing (synthetic output and cache round-trips)
# ---------------------------------------------------------------------------


def write_dataset_files(raw: RawDataset, out_dir) -> Dict[str, Path]:
    """Emit tweets/retweets/users JSONL files. Deterministic: fixed key order,
    examples in dataset order, users sorted by id."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "tweets": out_dir / "tweets.jsonl",
        "retweets": out_dir / "retweets.jsonl",
        "users": out_dir / "users.jsonl",
    }
    with open(paths["tweets"], "w", encoding="utf-8") as fh:
        for ex in raw.examples:
            fh.write(
                json.dumps(
                    {
                        "id": ex.tweet.id,
                        "text": ex.tweet.text,
                        "label": LABEL_NAMES[ex.tweet.label],
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    with open(paths["retweets"], "w", encoding="utf-8") as fh:
        for ex in raw.examples:
            g = ex.graph
            for i in range(g.n_nodes):
                rec = {
                    "tweet_id": ex.tweet.id,
                    "user_id": g.user_ids[i],
                    "order": int(g.orders[i]),
                }
                p = int(g.parent_indices[i])
                if p >= 0:
                    rec["parent_user_id"] = g.user_ids[p]
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with open(paths["users"], "w", encoding="utf-8") as fh:
        for user_id in sorted(raw.users):
            fh.write(
                json.dumps(
                    {
                        "user_id": user_id,
                        "features": raw.users[user_id].to_mapping(),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return paths


# ---------------------------------------------------------------------------
# Preparation
# ---------------------------------------------------------------------------


def prepare_dataset(
    raw: RawDataset, vocab_cap: int = 250_000, max_len: int = 30
) -> PreparedDataset:
    """Tokenize, build the vocabulary, encode to fixed length, and impute
    graph features. A tweet whose text cleans down to nothing is encoded as a
    single unknown token so the sequence encoder always sees one position."""
    token_lists = [tokenize(ex.tweet.text) for ex in raw.examples]
    vocab = build_vocab(token_lists, cap=vocab_cap)
    examples = []
    for ex, tokens in zip(raw.examples, token_lists):
        if not tokens:
            tokens = ["<unk>"]
        ids, true_len = encode_tweet(tokens, vocab, max_len)
        examples.append(
            PreparedExample(
                tweet_id=ex.tweet.id,
                label=ex.tweet.label,
                token_ids=ids,
                true_length=true_len,
                tokens=tokens[:true_len],
                graph=impute_user_features(ex.graph),
            )
        )
    builder = raw.examples[0].graph.builder if raw.examples else "chain(1)"
    return PreparedDataset(examples=examples, vocab=vocab, max_len=max_len, builder=builder)


def split_dataset(
    dataset: PreparedDataset, ratio: float, seed: int
) -> Tuple[List[PreparedExample], List[PreparedExample]]:
    """Seeded uniform shuffle, then floor(ratio * n) examples for training and
    the rest for testing."""
    n = len(dataset.examples)
    if n < 2:
        raise ValueError("need at least 2 examples to split")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    perm = RngTree(seed).stream("split").permutation(n)
    cut = int(ratio * n)
    train = [dataset.examples[i] for i in perm[:cut]]
    test = [dataset.examples[i] for i in perm[cut:]]
    return train, test


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


def compute_normalization(train_examples: Sequence[PreparedExample]) -> NormalizationStats:
    """Population mean/std of the count-typed columns over every node of
    every training graph."""
    if not train_examples:
        raise ValueError("cannot compute normalization stats from zero examples")
    stacked = np.concatenate([ex.graph.features for ex in train_examples], axis=0)
    cols = stacked[:, list(COUNT_FEATURE_INDICES)]
    return NormalizationStats(means=cols.mean(axis=0), stds=cols.std(axis=0))


def apply_normalization(
    examples: Sequence[PreparedExample], stats: NormalizationStats
) -> List[PreparedExample]:
    """Z-score count columns with the supplied stats; a zero-std column maps
    to all zeros. Binary columns pass through untouched."""
    out = []
    idx = list(COUNT_FEATURE_INDICES)
    safe = np.where(stats.stds > 0, stats.stds, 1.0)
    for ex in examples:
        feats = ex.graph.features.copy()
        cols = (feats[:, idx] - stats.means) / safe
        cols[:, stats.stds == 0] = 0.0
        feats[:, idx] = cols
        out.append(replace(ex, graph=replace(ex.graph, features=feats)))
    return out
