"""Graph view: masked multi-head attention over the propagation graph.

Attention is computed sparsely: for node i only the scores e_ij with j in
i's neighbor list (which always includes i itself) exist, and the softmax
normalizes over exactly that list. Coefficients for non-neighbors are never
materialized, so masking is structural rather than arithmetic.

Two layer flavours, applied in sequence:
- hidden layer: per-head ELU, heads concatenated;
- output layer: heads averaged, then ReLU.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .rng import RngTree
from .text_encoder import glorot

LEAKY_SLOPE = 0.3


@dataclass
class GatHeadParams:
    w: Tensor  # (f_in, f_out)
    a: Tensor  # (2 * f_out,)

    @classmethod
    def init(cls, tree: RngTree, prefix: str, f_in: int, f_out: int) -> "GatHeadParams":
        return cls(
            w=ad.parameter(
                f"{prefix}.w", glorot(tree.stream(f"init/{prefix}.w"), (f_in, f_out))
            ),
            a=ad.parameter(
                f"{prefix}.a", glorot(tree.stream(f"init/{prefix}.a"), (2 * f_out,))
            ),
        )

    def all(self) -> List[Tensor]:
        return [self.w, self.a]


@dataclass
class GatLayerParams:
    heads: List[GatHeadParams]
    mode: str  # "concat_elu" (hidden layer) or "average_relu" (output layer)

    @classmethod
    def init(
        cls, tree: RngTree, prefix: str, f_in: int, f_out: int, n_heads: int, mode: str
    ) -> "GatLayerParams":
        if mode not in ("concat_elu", "average_relu"):
            raise ValueError(f"unknown GAT layer mode: {mode}")
        heads = [
            GatHeadParams.init(tree, f"{prefix}.head{h}", f_in, f_out)
            for h in range(n_heads)
        ]
        return cls(heads=heads, mode=mode)

    def all(self) -> List[Tensor]:
        return [t for head in self.heads for t in head.all()]


def _check_self_loops(neighbors: List[np.ndarray]) -> None:
    for i, nbrs in enumerate(neighbors):
        if i not in nbrs:
            raise ValueError(f"node {i} has no self-loop; attention requires one")


def gat_attention_coeffs(
    feats: Tensor, neighbors: List[np.ndarray], head: GatHeadParams
) -> List[Tensor]:
    """Per-node attention coefficient vectors, aligned with ``neighbors[i]``.

    e_ij = LeakyReLU(a . [W u_i || W u_j]) for j in neighbors(i) only, then a
    softmax over that list. The concatenated form splits into two dot
    products: a_left . (W u_i) + a_right . (W u_j).
    """
    _check_self_loops(neighbors)
    proj = ad.matmul(feats, head.w)
    f_out = head.w.data.shape[1]
    a_left = ad.narrow(head.a, 0, f_out)
    a_right = ad.narrow(head.a, f_out, f_out)
    dst_scores = ad.matmul(proj, a_right)  # (n,)
    coeffs = []
    for i, nbrs in enumerate(neighbors):
        src_score = ad.matmul(ad.row(proj, i), a_left)  # scalar
        logits = ad.leaky_relu(
            ad.add(src_score, ad.take(dst_scores, nbrs)), slope=LEAKY_SLOPE
        )
        coeffs.append(ad.softmax(logits))
    return coeffs


def _aggregate_head(
    feats: Tensor,
    neighbors: List[np.ndarray],
    head: GatHeadParams,
    dropout_rate: float,
    rng: Optional[np.random.Generator],
    training: bool,
) -> Tuple[Tensor, List[Tensor]]:
    """Weighted neighbor sum per node for one head; returns the (n, f_out)
    pre-activation matrix plus the coefficient vectors."""
    coeffs = gat_attention_coeffs(feats, neighbors, head)
    proj = ad.matmul(feats, head.w)
    rows = []
    for i, nbrs in enumerate(neighbors):
        weights = coeffs[i]
        if training and dropout_rate > 0.0:
            weights = ad.dropout(weights, dropout_rate, rng, training)
        rows.append(ad.matmul(weights, ad.take(proj, nbrs)))
    return ad.stack(rows), coeffs


def gat_hidden_layer(
    feats: Tensor,
    neighbors: List[np.ndarray],
    layer: GatLayerParams,
    *,
    dropout_rate: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    training: bool = False,
    collect: Optional[List[List[Tensor]]] = None,
) -> Tensor:
    """Per-head ELU then concatenation across heads, in head order."""
    if layer.mode != "concat_elu":
        raise ValueError(f"gat_hidden_layer needs mode concat_elu, got {layer.mode}")
    outs = []
    for head in layer.heads:
        pre, coeffs = _aggregate_head(feats, neighbors, head, dropout_rate, rng, training)
        if collect is not None:
            collect.append(coeffs)
        outs.append(ad.elu(pre))
    return ad.concat(outs, axis=1)


def gat_output_layer(
    feats: Tensor,
    neighbors: List[np.ndarray],
    layer: GatLayerParams,
    *,
    dropout_rate: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    training: bool = False,
    collect: Optional[List[List[Tensor]]] = None,
) -> Tensor:
    """Average the heads' pre-activations, then ReLU."""
    if layer.mode != "average_relu":
        raise ValueError(f"gat_output_layer needs mode average_relu, got {layer.mode}")
    total = None
    for head in layer.heads:
        pre, coeffs = _aggregate_head(feats, neighbors, head, dropout_rate, rng, training)
        if collect is not None:
            collect.append(coeffs)
        total = pre if total is None else ad.add(total, pre)
    return ad.relu(ad.scale(total, 1.0 / len(layer.heads)))


def graph_readout(node_vectors: Tensor, mode: str = "mean") -> Tensor:
    """Pool node vectors into one graph vector. Nodes are sorted by retweet
    order, so first_by_order is row 0."""
    if node_vectors.data.shape[0] < 1:
        raise ValueError("cannot pool an empty graph")
    if mode == "mean":
        return ad.mean_axis0(node_vectors)
    if mode == "max":
        return ad.max_axis0(node_vectors)
    if mode == "first_by_order":
        return ad.row(node_vectors, 0)
    raise ValueError(f"unknown readout mode: {mode}")


def received_attention(
    coeff_sets: List[List[Tensor]], neighbors: List[np.ndarray], n_nodes: int
) -> np.ndarray:
    """Per-node sum of incoming coefficients a_{j->i} with j != i, totalled
    over every collected (layer, head) coefficient set."""
    received = np.zeros(n_nodes)
    for coeffs in coeff_sets:
        for j, nbrs in enumerate(neighbors):
            values = coeffs[j].data
            for pos, i in enumerate(nbrs):
                if i != j:
                    received[i] += values[pos]
    return received


def edge_coefficients(
    coeff_sets: List[List[Tensor]],
    neighbors: List[np.ndarray],
    labels: List[Tuple[int, int]],
) -> List[Tuple[int, int, int, int, float]]:
    """Flatten collected coefficients to (layer, head, src, dst, value) rows.
    ``labels[k]`` names the (layer, head) that produced ``coeff_sets[k]``."""
    rows = []
    for (layer, head), coeffs in zip(labels, coeff_sets):
        for src, nbrs in enumerate(neighbors):
            values = coeffs[src].data
            for pos, dst in enumerate(nbrs):
                rows.append((layer, head, src, int(dst), float(values[pos])))
    return rows
