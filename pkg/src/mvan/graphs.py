"""Retweet propagation graphs: construction, imputation, deadline truncation.

A graph's nodes are the retweet users of one source tweet, sorted by retweet
order. Edges come from one of two builders:

- ``chain(k)``: each node connects bidirectionally to its k immediate
  predecessors (k defaults to 1).
- ``parent_tree``: each node connects to its recorded parent retweeter; nodes
  without a parent fall back to chain(1) behaviour.

Every node always carries a self-loop. A record whose parent user id never
appears earlier in the same cascade is an input error; encode
retweets-of-the-source-author with a null parent instead.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

FEATURE_NAMES: Tuple[str, ...] = (
    "user_contributors_enabled",
    "user_default_profile",
    "user_default_profile_image",
    "user_favourites_count",
    "user_follow_request_sent",
    "user_followers_count",
    "user_following",
    "user_friends_count",
    "user_geo_enabled",
    "user_has_extended_profile",
    "user_listed_count",
    "user_profile_use_background_image",
    "user_protected",
    "user_statuses_count",
    "user_verified",
)
N_FEATURES = len(FEATURE_NAMES)
COUNT_FEATURE_INDICES: Tuple[int, ...] = (3, 5, 7, 10, 13)
BINARY_FEATURE_INDICES: Tuple[int, ...] = tuple(
    i for i in range(N_FEATURES) if i not in COUNT_FEATURE_INDICES
)


class GraphConstructionError(Exception):
    """Invalid retweet records or builder specification."""


@dataclass(frozen=True)
class UserFeatures:
    """One user's 15-slot profile vector, or an explicitly missing record."""

    values: np.ndarray  # (15,) float64; zeros when missing
    missing: bool

    @classmethod
    def absent(cls) -> "UserFeatures":
        return cls(values=np.zeros(N_FEATURES), missing=True)

    @classmethod
    def from_mapping(cls, fields: Mapping[str, object]) -> "UserFeatures":
        """Any absent or null slot marks the whole record missing."""
        values = np.zeros(N_FEATURES)
        for i, name in enumerate(FEATURE_NAMES):
            v = fields.get(name)
            if v is None:
                return cls.absent()
            values[i] = float(v)
        return cls(values=values, missing=False)

    def to_mapping(self) -> Dict[str, Optional[float]]:
        if self.missing:
            return {name: None for name in FEATURE_NAMES}
        out: Dict[str, Optional[float]] = {}
        for i, name in enumerate(FEATURE_NAMES):
            v = self.values[i]
            out[name] = int(v) if float(v).is_integer() else float(v)
        return out


@dataclass(frozen=True)
class RetweetRecord:
    tweet_id: str
    user_id: str
    order: int
    parent_user_id: Optional[str] = None


@dataclass
class PropagationGraph:
    """Nodes sorted by retweet order, adjacency as per-node index arrays."""

    user_ids: List[str]
    features: np.ndarray  # (n, 15)
    missing: np.ndarray  # (n,) bool, True where the record was imputed/absent
    orders: np.ndarray  # (n,) int64
    parent_indices: np.ndarray  # (n,) int64, -1 when no recorded parent
    neighbors: List[np.ndarray]  # per node: sorted indices incl. the node itself
    builder: str

    @property
    def n_nodes(self) -> int:
        return len(self.user_ids)

    def validate(self) -> None:
        n = self.n_nodes
        if n < 1:
            raise GraphConstructionError("graph must contain at least one node")
        for i, nbrs in enumerate(self.neighbors):
            if i not in nbrs:
                raise GraphConstructionError(f"node {i} is missing its self-loop")
            if nbrs.min() < 0 or nbrs.max() >= n:
                raise GraphConstructionError(f"node {i} has out-of-range neighbors")


_CHAIN_RE = re.compile(r"^chain(?:\((\d+)\))?$")


def parse_builder(spec: str) -> Tuple[str, int]:
    """Normalize a builder name: 'chain', 'chain(k)', or 'parent_tree'."""
    spec = spec.strip()
    if spec == "parent_tree":
        return "parent_tree", 0
    m = _CHAIN_RE.match(spec)
    if m:
        k = int(m.group(1)) if m.group(1) else 1
        if k < 1:
            raise GraphConstructionError(f"chain span must be >= 1, got {k}")
        return "chain", k
    raise GraphConstructionError(f"unknown graph builder: {spec!r}")


def builder_name(kind: str, k: int) -> str:
    return f"chain({k})" if kind == "chain" else "parent_tree"


def _edges(kind: str, k: int, parent_indices: np.ndarray) -> List[np.ndarray]:
    n = len(parent_indices)
    sets: List[set] = [{i} for i in range(n)]
    if kind == "chain":
        for i in range(n):
            for j in range(max(0, i - k), i):
                sets[i].add(j)
                sets[j].add(i)
    else:
        for i in range(n):
            p = int(parent_indices[i])
            if p >= 0:
                sets[i].add(p)
                sets[p].add(i)
            elif i > 0:  # parentless record: fall back to the previous retweeter
                sets[i].add(i - 1)
                sets[i - 1].add(i)
    return [np.array(sorted(s), dtype=np.intp) for s in sets]


def build_propagation_graph(
    records: Sequence[RetweetRecord],
    builder: str,
    user_features: Optional[Mapping[str, UserFeatures]] = None,
) -> PropagationGraph:
    """Assemble a graph from one tweet's retweet records.

    Records are sorted by retweet order (orders must be unique). Users absent
    from ``user_features`` become missing records for imputation to fill.
    """
    if not records:
        raise GraphConstructionError("cannot build a graph from zero retweet records")
    kind, k = parse_builder(builder)
    ordered = sorted(records, key=lambda r: r.order)
    orders = [r.order for r in ordered]
    if len(set(orders)) != len(orders):
        raise GraphConstructionError(
            f"duplicate retweet orders for tweet {ordered[0].tweet_id!r}"
        )
    index_of: Dict[str, int] = {}
    for i, r in enumerate(ordered):
        index_of.setdefault(r.user_id, i)

    parent_indices = np.full(len(ordered), -1, dtype=np.int64)
    for i, r in enumerate(ordered):
        if r.parent_user_id is None:
            continue
        p = index_of.get(r.parent_user_id)
        if p is None:
            raise GraphConstructionError(
                f"tweet {r.tweet_id!r}: parent user {r.parent_user_id!r} of "
                f"{r.user_id!r} does not appear in the cascade (use null for "
                f"retweets of the source author)"
            )
        if p >= i:
            raise GraphConstructionError(
                f"tweet {r.tweet_id!r}: parent {r.parent_user_id!r} does not "
                f"precede {r.user_id!r}"
            )
        parent_indices[i] = p

    lookup = user_features or {}
    feats = np.zeros((len(ordered), N_FEATURES))
    missing = np.zeros(len(ordered), dtype=bool)
    for i, r in enumerate(ordered):
        uf = lookup.get(r.user_id)
        if uf is None or uf.missing:
            missing[i] = True
        else:
            feats[i] = uf.values

    graph = PropagationGraph(
        user_ids=[r.user_id for r in ordered],
        features=feats,
        missing=missing,
        orders=np.array(orders, dtype=np.int64),
        parent_indices=parent_indices,
        neighbors=_edges(kind, k, parent_indices),
        builder=builder_name(kind, k),
    )
    graph.validate()
    return graph


def impute_user_features(graph: PropagationGraph) -> PropagationGraph:
    """Fill missing records with the per-feature mean of the graph's
    non-missing records (fractional means for binary features). A graph with
    no donors at all falls back to zeros, with a warning."""
    if not graph.missing.any():
        return graph
    feats = graph.features.copy()
    donors = ~graph.missing
    if donors.any():
        feats[graph.missing] = graph.features[donors].mean(axis=0)
    else:
        logger.warning(
            "all %d users missing features in one cascade; imputing zeros",
            graph.n_nodes,
        )
        feats[graph.missing] = 0.0
    return replace(graph, features=feats)


def truncate_by_deadline(graph: PropagationGraph, keep_fraction: float) -> PropagationGraph:
    """Keep the earliest ceil(keep_fraction * n) nodes by retweet order and
    rebuild edges with the graph's own builder.

    Feature vectors carry over unchanged; values filled by imputation are not
    recomputed from the survivors.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    n = graph.n_nodes
    m = math.ceil(keep_fraction * n)
    if m >= n:
        return graph
    kind, k = parse_builder(graph.builder)
    parents = graph.parent_indices[:m]
    out = PropagationGraph(
        user_ids=graph.user_ids[:m],
        features=graph.features[:m].copy(),
        missing=graph.missing[:m].copy(),
        orders=graph.orders[:m].copy(),
        parent_indices=parents.copy(),
        neighbors=_edges(kind, k, parents),
        builder=graph.builder,
    )
    out.validate()
    return out
