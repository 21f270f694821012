"""Text view: embeddings -> stacked BiGRU -> additive word attention.

Padding is handled structurally: the recurrence and the attention softmax only
ever see the first ``true_length`` positions, so pad rows of the output are
exactly zero and pad attention weights are exactly zero, with no masking
arithmetic involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .rng import RngTree


def glorot(rng: np.random.Generator, shape) -> np.ndarray:
    fan_in = shape[0] if len(shape) > 1 else shape[0]
    fan_out = shape[1] if len(shape) > 1 else 1
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


@dataclass
class GruParams:
    """One direction of one GRU layer. No bias terms: each gate is a sum of
    an input projection and a hidden-state projection."""

    u_z: Tensor
    u_r: Tensor
    u_h: Tensor
    w_z: Tensor
    w_r: Tensor
    w_h: Tensor

    @classmethod
    def init(cls, tree: RngTree, prefix: str, input_dim: int, hidden: int) -> "GruParams":
        def p(name, shape):
            full = f"{prefix}.{name}"
            return ad.parameter(full, glorot(tree.stream(f"init/{full}"), shape))

        return cls(
            u_z=p("u_z", (input_dim, hidden)),
            u_r=p("u_r", (input_dim, hidden)),
            u_h=p("u_h", (input_dim, hidden)),
            w_z=p("w_z", (hidden, hidden)),
            w_r=p("w_r", (hidden, hidden)),
            w_h=p("w_h", (hidden, hidden)),
        )

    def all(self) -> List[Tensor]:
        return [self.u_z, self.u_r, self.u_h, self.w_z, self.w_r, self.w_h]


@dataclass
class BiGruLayer:
    fwd: GruParams
    bwd: GruParams

    @classmethod
    def init(cls, tree: RngTree, prefix: str, input_dim: int, hidden: int) -> "BiGruLayer":
        return cls(
            fwd=GruParams.init(tree, f"{prefix}.fwd", input_dim, hidden),
            bwd=GruParams.init(tree, f"{prefix}.bwd", input_dim, hidden),
        )

    def all(self) -> List[Tensor]:
        return self.fwd.all() + self.bwd.all()


@dataclass
class TextAttnParams:
    w_w: Tensor  # (2*hidden, attn_dim)
    b_w: Tensor  # (attn_dim,)
    u_w: Tensor  # (attn_dim,)

    @classmethod
    def init(cls, tree: RngTree, prefix: str, input_dim: int, attn_dim: int) -> "TextAttnParams":
        return cls(
            w_w=ad.parameter(
                f"{prefix}.w_w", glorot(tree.stream(f"init/{prefix}.w_w"), (input_dim, attn_dim))
            ),
            b_w=ad.parameter(f"{prefix}.b_w", np.zeros(attn_dim)),
            u_w=ad.parameter(
                f"{prefix}.u_w", glorot(tree.stream(f"init/{prefix}.u_w"), (attn_dim,))
            ),
        )

    def all(self) -> List[Tensor]:
        return [self.w_w, self.b_w, self.u_w]


@dataclass
class TextEncoderOutput:
    s: Tensor  # sentence vector, (2*hidden,)
    weights: np.ndarray  # (max_len,), exactly 0 on pad positions
    attn: Optional[Tensor]  # (true_length,) on-tape weights; None for mean pooling


def gru_cell(x: Tensor, h_prev: Tensor, p: GruParams) -> Tensor:
    """z and r gate the previous state; z interpolates toward the candidate:
    h_t = (1 - z) * h_prev + z * h_tilde."""
    z = ad.sigmoid(ad.add(ad.matmul(x, p.u_z), ad.matmul(h_prev, p.w_z)))
    r = ad.sigmoid(ad.add(ad.matmul(x, p.u_r), ad.matmul(h_prev, p.w_r)))
    h_tilde = ad.tanh(ad.add(ad.matmul(x, p.u_h), ad.matmul(ad.mul(h_prev, r), p.w_h)))
    one_minus_z = ad.sub(ad.constant(np.ones(z.data.shape)), z)
    return ad.add(ad.mul(one_minus_z, h_prev), ad.mul(z, h_tilde))


def _run_direction(rows: List[Tensor], p: GruParams, hidden: int, reverse: bool) -> List[Tensor]:
    h = ad.constant(np.zeros(hidden))
    order = range(len(rows) - 1, -1, -1) if reverse else range(len(rows))
    states: dict = {}
    for t in order:
        h = gru_cell(rows[t], h, p)
        states[t] = h
    return [states[t] for t in range(len(rows))]


def bigru_over_rows(rows: List[Tensor], layers: List[BiGruLayer], hidden: int) -> List[Tensor]:
    """Run stacked BiGRU layers over a list of per-position input vectors;
    returns per-position concat(forward, backward) vectors."""
    current = rows
    for layer in layers:
        fwd = _run_direction(current, layer.fwd, hidden, reverse=False)
        bwd = _run_direction(current, layer.bwd, hidden, reverse=True)
        current = [ad.concat([f, b]) for f, b in zip(fwd, bwd)]
    return current


def bigru_encode(
    seq: np.ndarray,
    true_length: int,
    embedding: Tensor,
    layers: List[BiGruLayer],
    hidden: int,
) -> Tensor:
    """Encode an index sequence into an (max_len, 2*hidden) matrix whose rows
    past ``true_length`` are zero."""
    if true_length < 1:
        raise ValueError("true_length must be at least 1")
    max_len = len(seq)
    gathered = ad.take(embedding, seq[:true_length])
    rows = [ad.row(gathered, t) for t in range(true_length)]
    encoded = ad.stack(bigru_over_rows(rows, layers, hidden))
    if true_length == max_len:
        return encoded
    pad = ad.constant(np.zeros((max_len - true_length, encoded.data.shape[1])))
    return ad.concat([encoded, pad], axis=0)


def word_attention(h: Tensor, true_length: int, p: TextAttnParams) -> TextEncoderOutput:
    """Additive attention over the first ``true_length`` rows of ``h``:
    u_t = tanh(h_t W_w + b_w), weights = softmax(u_t . u_w), S = sum a_t h_t."""
    if true_length < 1:
        raise ValueError("true_length must be at least 1")
    real = ad.narrow(h, 0, true_length)
    u = ad.tanh(ad.add(ad.matmul(real, p.w_w), p.b_w))
    scores = ad.matmul(u, p.u_w)
    attn = ad.softmax(scores)
    s = ad.matmul(attn, real)
    weights = np.zeros(h.data.shape[0])
    weights[:true_length] = attn.data
    return TextEncoderOutput(s=s, weights=weights, attn=attn)


def mean_pool(h: Tensor, true_length: int) -> TextEncoderOutput:
    """Attention-free text pooling: the mean of the non-pad rows. Reported
    weights are uniform over real positions for explanation parity."""
    if true_length < 1:
        raise ValueError("true_length must be at least 1")
    real = ad.narrow(h, 0, true_length)
    s = ad.mean_axis0(real)
    weights = np.zeros(h.data.shape[0])
    weights[:true_length] = 1.0 / true_length
    return TextEncoderOutput(s=s, weights=weights, attn=None)
