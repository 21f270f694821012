"""Multi-view fake news classifier.

Two encoder branches share a two-layer feed-forward head: a bidirectional GRU
with additive word attention reads the source tweet, and a two-layer
multi-head graph attention network reads the retweet propagation graph. The
ablation variants keep the same head and swap one piece:

- MVAN: both views, both attention mechanisms (the full model)
- MVAN_TSA: word attention replaced by mean pooling over real positions
- MVAN_PSA: graph attention replaced by one shared linear map with
  unweighted neighbor averaging
- TSAN: text view only (no graph parameters exist)
- PSAN: graph view only (no text parameters exist)

Forward passes run on one example at a time; batching happens in the trainer
by averaging per-example losses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .config import ModelConfig, normalize_variant
from .dataset import PreparedExample
from .graph_encoder import (
    GatLayerParams,
    edge_coefficients,
    gat_hidden_layer,
    gat_output_layer,
    graph_readout,
    received_attention,
)
from .graphs import N_FEATURES
from .rng import RngTree
from .text_encoder import (
    BiGruLayer,
    TextAttnParams,
    TextEncoderOutput,
    bigru_over_rows,
    glorot,
    mean_pool,
    word_attention,
)

PROB_FLOOR = 1e-12


@dataclass
class HeadParams:
    """Fusion head: one ReLU hidden layer, then a two-way linear output."""

    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    @classmethod
    def init(cls, tree: RngTree, prefix: str, in_dim: int, hidden: int) -> "HeadParams":
        return cls(
            w1=ad.parameter(
                f"{prefix}.w1", glorot(tree.stream(f"init/{prefix}.w1"), (in_dim, hidden))
            ),
            b1=ad.parameter(f"{prefix}.b1", np.zeros(hidden)),
            w2=ad.parameter(
                f"{prefix}.w2", glorot(tree.stream(f"init/{prefix}.w2"), (hidden, 2))
            ),
            b2=ad.parameter(f"{prefix}.b2", np.zeros(2)),
        )

    def all(self) -> List[Tensor]:
        return [self.w1, self.b1, self.w2, self.b2]


def head_logits(views: List[Tensor], head: HeadParams) -> Tensor:
    """Concatenate the available view vectors and run the fusion head."""
    if not views:
        raise ValueError("head needs at least one view vector")
    z = views[0] if len(views) == 1 else ad.concat(views)
    h = ad.relu(ad.add(ad.matmul(z, head.w1), head.b1))
    return ad.add(ad.matmul(h, head.w2), head.b2)


def predicted_label(probabilities: np.ndarray) -> int:
    """Argmax with ties resolved to label 0."""
    return int(probabilities[1] > probabilities[0])


def cross_entropy(probabilities: np.ndarray, label: int) -> float:
    """Negative log-probability of the true label, floored at 1e-12 so a
    confidently wrong prediction yields a large finite loss."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    return float(-np.log(max(float(probabilities[label]), PROB_FLOOR)))


@dataclass
class ForwardPass:
    logits: Tensor
    text: Optional[TextEncoderOutput]
    node_vectors: Optional[Tensor]
    coeff_sets: List[List[Tensor]] = field(default_factory=list)
    coeff_labels: List[Tuple[int, int]] = field(default_factory=list)


@dataclass
class PredictionOutput:
    """One example's prediction plus the raw material for explanations."""

    tweet_id: str
    probabilities: np.ndarray  # (2,), sums to 1
    label: int
    word_weights: Optional[np.ndarray]  # (max_len,), zeros on pads; None for PSAN
    received: Optional[np.ndarray]  # per-node incoming attention; None without GAT
    edge_rows: List[Tuple[int, int, int, int, float]]  # (layer, head, src, dst, coeff)


class MVANModel:
    def __init__(
        self,
        config: ModelConfig,
        vocab_size: int,
        *,
        embedding: Optional[Tensor],
        text_layers: List[BiGruLayer],
        text_attention: Optional[TextAttnParams],
        gat_hidden: Optional[GatLayerParams],
        gat_output: Optional[GatLayerParams],
        psa_map: Optional[Tensor],
        head: HeadParams,
    ):
        self.config = config
        self.variant = normalize_variant(config.variant)
        self.vocab_size = vocab_size
        self.embedding = embedding
        self.text_layers = text_layers
        self.text_attention = text_attention
        self.gat_hidden = gat_hidden
        self.gat_output = gat_output
        self.psa_map = psa_map
        self.head = head

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def build(
        cls,
        config: ModelConfig,
        vocab_size: int,
        tree: RngTree,
        pretrained_embeddings: Optional[np.ndarray] = None,
    ) -> "MVANModel":
        """Initialize parameters from labeled streams of ``tree``. Identical
        (config, vocab_size, tree seed) always produce identical weights."""
        config.validate()
        variant = normalize_variant(config.variant)
        if vocab_size < 2:
            raise ValueError("vocab must contain at least the pad and unknown tokens")

        embedding = None
        text_layers: List[BiGruLayer] = []
        text_attention = None
        if variant != "PSAN":
            if pretrained_embeddings is not None:
                mat = np.array(pretrained_embeddings, dtype=np.float64)
                if mat.shape != (vocab_size, config.embed_dim):
                    raise ValueError(
                        f"embedding matrix shape {mat.shape} does not match "
                        f"(vocab={vocab_size}, dim={config.embed_dim})"
                    )
            else:
                rng = tree.stream("init/text_encoder.embedding")
                mat = rng.uniform(-0.5, 0.5, (vocab_size, config.embed_dim))
                mat /= config.embed_dim
            mat[0] = 0.0  # pad row; never gathered, stays zero through training
            embedding = ad.parameter("text_encoder.embedding", mat)
            in_dim = config.embed_dim
            for i in range(config.gru_layers):
                text_layers.append(
                    BiGruLayer.init(tree, f"text_encoder.layer{i}", in_dim, config.gru_hidden)
                )
                in_dim = 2 * config.gru_hidden
            if variant in ("MVAN", "TSAN"):
                text_attention = TextAttnParams.init(
                    tree, "text_encoder.attention", 2 * config.gru_hidden, config.attn_dim
                )

        gat_hidden = None
        gat_output = None
        psa_map = None
        if variant != "TSAN":
            if variant == "MVAN_PSA":
                psa_map = ad.parameter(
                    "graph_encoder.psa.w",
                    glorot(
                        tree.stream("init/graph_encoder.psa.w"),
                        (N_FEATURES, config.gat_output_dim),
                    ),
                )
            else:
                gat_hidden = GatLayerParams.init(
                    tree,
                    "graph_encoder.layer0",
                    N_FEATURES,
                    config.gat_hidden_per_head,
                    config.gat_heads,
                    "concat_elu",
                )
                gat_output = GatLayerParams.init(
                    tree,
                    "graph_encoder.layer1",
                    config.gat_heads * config.gat_hidden_per_head,
                    config.gat_output_dim,
                    config.gat_heads,
                    "average_relu",
                )

        head_in = 0
        if variant != "PSAN":
            head_in += 2 * config.gru_hidden
        if variant != "TSAN":
            head_in += config.gat_output_dim
        head = HeadParams.init(tree, "head", head_in, config.head_hidden)

        return cls(
            config,
            vocab_size,
            embedding=embedding,
            text_layers=text_layers,
            text_attention=text_attention,
            gat_hidden=gat_hidden,
            gat_output=gat_output,
            psa_map=psa_map,
            head=head,
        )

    # ------------------------------------------------------------------
    # Parameter access
    # ------------------------------------------------------------------

    def params(self) -> Dict[str, Tensor]:
        """All trainable tensors keyed by name, sorted by name."""
        tensors: List[Tensor] = []
        if self.embedding is not None:
            tensors.append(self.embedding)
        for layer in self.text_layers:
            tensors.extend(layer.all())
        if self.text_attention is not None:
            tensors.extend(self.text_attention.all())
        if self.gat_hidden is not None:
            tensors.extend(self.gat_hidden.all())
        if self.gat_output is not None:
            tensors.extend(self.gat_output.all())
        if self.psa_map is not None:
            tensors.append(self.psa_map)
        tensors.extend(self.head.all())
        return {t.name: t for t in sorted(tensors, key=lambda t: t.name)}

    def parameter_arrays(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.params().items()}

    def load_parameter_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        own = self.params()
        missing = sorted(set(own) - set(arrays))
        extra = sorted(set(arrays) - set(own))
        if missing or extra:
            raise ValueError(
                f"parameter set mismatch: missing {missing or 'none'}, "
                f"unexpected {extra or 'none'}"
            )
        for name, tensor in own.items():
            arr = np.array(arrays[name], dtype=np.float64)
            if arr.shape != tensor.data.shape:
                raise ValueError(
                    f"shape mismatch for {name}: stored {arr.shape}, "
                    f"model {tensor.data.shape}"
                )
            tensor.data = arr

    # ------------------------------------------------------------------
    # Forward
    # ------------------------------------------------------------------

    def forward(
        self,
        example: PreparedExample,
        *,
        training: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> ForwardPass:
        rate = self.config.dropout
        if training and rate > 0 and rng is None:
            raise ValueError("training forward with dropout > 0 needs an rng stream")

        views: List[Tensor] = []
        text_out: Optional[TextEncoderOutput] = None
        node_vectors: Optional[Tensor] = None
        coeff_sets: List[List[Tensor]] = []
        coeff_labels: List[Tuple[int, int]] = []

        if self.variant != "PSAN":
            length = example.true_length
            gathered = ad.take(self.embedding, example.token_ids[:length])
            if training:
                gathered = ad.dropout(gathered, rate, rng, training)
            rows = [ad.row(gathered, t) for t in range(length)]
            h = ad.stack(bigru_over_rows(rows, self.text_layers, self.config.gru_hidden))
            if training:
                h = ad.dropout(h, rate, rng, training)
            if self.text_attention is not None:
                text_out = word_attention(h, length, self.text_attention)
            else:
                text_out = mean_pool(h, length)
            # report weights at the example's padded length
            full = np.zeros(len(example.token_ids))
            full[:length] = text_out.weights[:length]
            text_out.weights = full
            views.append(text_out.s)

        if self.variant != "TSAN":
            g = example.graph
            feats = ad.constant(g.features)
            if training:
                feats = ad.dropout(feats, rate, rng, training)
            if self.variant == "MVAN_PSA":
                proj = ad.matmul(feats, self.psa_map)
                pooled = [ad.mean_axis0(ad.take(proj, nbrs)) for nbrs in g.neighbors]
                node_vectors = ad.relu(ad.stack(pooled))
            else:
                drop = rate if training else 0.0
                hidden = gat_hidden_layer(
                    feats,
                    g.neighbors,
                    self.gat_hidden,
                    dropout_rate=drop,
                    rng=rng,
                    training=training,
                    collect=coeff_sets,
                )
                coeff_labels.extend((0, h_i) for h_i in range(len(self.gat_hidden.heads)))
                if training:
                    hidden = ad.dropout(hidden, rate, rng, training)
                node_vectors = gat_output_layer(
                    hidden,
                    g.neighbors,
                    self.gat_output,
                    dropout_rate=drop,
                    rng=rng,
                    training=training,
                    collect=coeff_sets,
                )
                coeff_labels.extend((1, h_i) for h_i in range(len(self.gat_output.heads)))
            views.append(graph_readout(node_vectors, self.config.readout))

        logits = head_logits(views, self.head)
        return ForwardPass(
            logits=logits,
            text=text_out,
            node_vectors=node_vectors,
            coeff_sets=coeff_sets,
            coeff_labels=coeff_labels,
        )

    def loss(
        self,
        example: PreparedExample,
        *,
        training: bool = False,
        rng: Optional[np.random.Generator] = None,
    ) -> Tensor:
        fwd = self.forward(example, training=training, rng=rng)
        return ad.cross_entropy_with_logits(fwd.logits, example.label)

    def predict(self, example: PreparedExample) -> PredictionOutput:
        fwd = self.forward(example, training=False)
        probabilities = ad.softmax(fwd.logits).data.copy()
        received = None
        edge_rows: List[Tuple[int, int, int, int, float]] = []
        if fwd.coeff_sets:
            g = example.graph
            received = received_attention(fwd.coeff_sets, g.neighbors, g.n_nodes)
            edge_rows = edge_coefficients(fwd.coeff_sets, g.neighbors, fwd.coeff_labels)
        return PredictionOutput(
            tweet_id=example.tweet_id,
            probabilities=probabilities,
            label=predicted_label(probabilities),
            word_weights=None if fwd.text is None else fwd.text.weights.copy(),
            received=received,
            edge_rows=edge_rows,
        )
