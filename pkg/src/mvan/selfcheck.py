"""Runtime verification suites behind the ``selfcheck`` CLI command.

Each check recomputes a quantity through an independent route (central finite
differences, a dense masked-softmax reference, per-example counting, the
textbook optimizer recurrence) and compares against the production code.
Results print one line per check; the command exits nonzero if any fails.
"""

from __future__ import annotations

import tempfile
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ModelConfig
from .dataset import apply_normalization, compute_normalization, prepare_dataset
from .graph_encoder import GatLayerParams, gat_hidden_layer
from .metrics import compute_metrics
from .model import MVANModel
from .optim import AdamHyper, AdamState, adam_step
from .rng import RngTree
from .synthetic import SyntheticConfig, gen_synthetic


def _finite_difference(build: Callable[[], Tensor], params: List[Tensor], step=1e-5):
    out = []
    for p in params:
        g = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = build().item()
            flat[i] = keep - step
            down = build().item()
            flat[i] = keep
            gflat[i] = (up - down) / (2 * step)
        out.append(g)
    return out


def _max_rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-3)
    return float(np.max(np.abs(analytic - numeric) / denom))


def _toy_example():
    """A small prepared example with a 4-node chain graph and 5-token text."""
    data = gen_synthetic(SyntheticConfig(n_examples=4, vocab_size=20, mean_retweets=3.0), 5)
    prep = prepare_dataset(data.dataset, max_len=5)
    stats = compute_normalization(prep.examples)
    return prep, apply_normalization(prep.examples, stats)


def check_model_gradients() -> Tuple[bool, str]:
    """Full-model analytic gradients vs central finite differences."""
    config = ModelConfig(
        embed_dim=3, gru_hidden=4, gru_layers=1, attn_dim=3, max_len=5,
        gat_heads=2, gat_hidden_per_head=3, gat_output_dim=3, head_hidden=4,
        dropout=0.0,
    )
    prep, examples = _toy_example()
    model = MVANModel.build(config, len(prep.vocab), RngTree(2).child("model"))
    example = examples[0]
    params = model.params()
    tensors = list(params.values())

    def build():
        return model.loss(example)

    grads = ad.gradient(build(), tensors)
    numeric = _finite_difference(build, tensors)
    worst = max(_max_rel_err(grads[p], n) for p, n in zip(tensors, numeric))
    return worst < 1e-4, f"max relative error {worst:.2e} (tolerance 1e-4)"


def _dense_gat_reference(feats, neighbors, w, a, slope=0.3):
    """Brute-force masked attention over an explicit N x N adjacency."""
    n = feats.shape[0]
    proj = feats @ w
    f_out = proj.shape[1]
    adj = np.zeros((n, n), dtype=bool)
    for i, nbrs in enumerate(neighbors):
        adj[i, nbrs] = True
    scores = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            z = np.concatenate([proj[i], proj[j]]) @ a
            scores[i, j] = z if z > 0 else slope * z
    scores = np.where(adj, scores, -np.inf)
    shifted = np.exp(scores - scores.max(axis=1, keepdims=True))
    coeffs = shifted / shifted.sum(axis=1, keepdims=True)
    return coeffs


def check_gat_oracle() -> Tuple[bool, str]:
    """Sparse masked attention equals the dense reference on small graphs."""
    rng = RngTree(11).stream("gat_oracle")
    topologies = {
        "singleton": [np.array([0])],
        "chain4": [np.array([0, 1]), np.array([0, 1, 2]), np.array([1, 2, 3]), np.array([2, 3])],
        "star5": [np.arange(5)] + [np.array(sorted([0, i])) for i in range(1, 5)],
        "complete6": [np.arange(6) for _ in range(6)],
    }
    worst = 0.0
    for name, neighbors in topologies.items():
        n = len(neighbors)
        feats_np = rng.normal(size=(n, 3))
        layer = GatLayerParams.init(RngTree(7).child(name), "g", 3, 2, 2, "concat_elu")
        collected: List[List[Tensor]] = []
        gat_hidden_layer(ad.constant(feats_np), neighbors, layer, collect=collected)
        for head, coeff_rows in zip(layer.heads, collected):
            dense = _dense_gat_reference(feats_np, neighbors, head.w.data, head.a.data)
            for i, nbrs in enumerate(neighbors):
                sparse_row = np.zeros(n)
                sparse_row[nbrs] = coeff_rows[i].data
                worst = max(worst, float(np.max(np.abs(sparse_row - dense[i]))))
    return worst < 1e-10, f"max abs diff vs dense reference {worst:.2e} (tolerance 1e-10)"


def check_metrics_counting() -> Tuple[bool, str]:
    """Vectorized metrics equal a per-example counting loop."""
    rng = RngTree(3).stream("metrics")
    for trial in range(50):
        n = int(rng.integers(1, 200))
        y_true = rng.integers(0, 2, n)
        y_pred = rng.integers(0, 2, n)
        got = compute_metrics(y_true, y_pred)
        tp = tn = fp = fn = 0
        for t, p in zip(y_true, y_pred):
            if t == 1 and p == 1:
                tp += 1
            elif t == 0 and p == 0:
                tn += 1
            elif t == 0 and p == 1:
                fp += 1
            else:
                fn += 1
        if (got.confusion.tp, got.confusion.tn, got.confusion.fp, got.confusion.fn) != (
            tp, tn, fp, fn,
        ):
            return False, f"confusion mismatch on trial {trial}"
        acc = (tp + tn) / n
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        if (got.accuracy, got.precision, got.recall, got.f1) != (acc, prec, rec, f1):
            return False, f"metric mismatch on trial {trial}"
    return True, "50 random vectors match per-example counting exactly"


def check_adam_reference() -> Tuple[bool, str]:
    """First Adam step on theta=1 with gradient 0.5 lands at 0.999."""
    p = ad.parameter("theta", np.array([1.0]))
    state = AdamState([p])
    adam_step(state, {p: np.array([0.5])}, AdamHyper())
    err = abs(p.data[0] - 0.999)
    return err < 1e-9, f"first-step value off by {err:.2e} (tolerance 1e-9)"


def check_checkpoint_roundtrip() -> Tuple[bool, str]:
    """Save then load returns bit-identical arrays."""
    rng = RngTree(17).stream("ckpt")
    params = {
        "a.w": rng.normal(size=(3, 4)),
        "b.v": rng.normal(size=(7,)),
        "c.s": np.array(rng.normal()),
    }
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "check.ckpt"
        save_checkpoint(path, params)
        loaded = load_checkpoint(path)
    same = set(loaded) == set(params) and all(
        np.array_equal(loaded[k], np.asarray(params[k], dtype=np.float64)) for k in params
    )
    return same, "round-trip arrays bit-identical" if same else "round-trip mismatch"


CHECKS: Dict[str, Callable[[], Tuple[bool, str]]] = {
    "model-gradients": check_model_gradients,
    "gat-dense-oracle": check_gat_oracle,
    "metrics-counting": check_metrics_counting,
    "adam-reference": check_adam_reference,
    "checkpoint-roundtrip": check_checkpoint_roundtrip,
}


def run_selfcheck(print_fn: Callable[[str], None] = print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        passed, detail = check()
        ok = ok and passed
        print_fn(f"{'ok' if passed else 'FAIL'}: {name}: {detail}")
    return ok
