"""Independent oracles shared by the test suite.

Everything here is deliberately written without touching the library's own
differentiation or sparse attention paths, so a bug in the implementation
cannot hide inside its own checker.
"""

from __future__ import annotations

from typing import Callable, Dict

import numpy as np

from mvan.autodiff import Tensor


def softmax_oracle(x: np.ndarray) -> np.ndarray:
    """Direct exponentiation/normalization, no stabilization tricks."""
    e = np.exp(np.asarray(x, dtype=np.float64))
    return e / e.sum()


def finite_difference_gradients(
    f: Callable[[], float],
    params: Dict[str, Tensor],
    step: float = 1e-5,
) -> Dict[str, np.ndarray]:
    """Central differences of ``f`` w.r.t. every element of every parameter.

    ``f`` must re-evaluate the model from the parameters' current arrays; the
    arrays are perturbed in place and restored afterwards.
    """
    grads = {}
    for name, p in params.items():
        flat = p.data.reshape(-1)
        g = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            plus = f()
            flat[i] = orig - step
            minus = f()
            flat[i] = orig
            g[i] = (plus - minus) / (2.0 * step)
        grads[name] = g.reshape(p.data.shape)
    return grads


def max_relative_error(
    analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-3
) -> float:
    """Elementwise |a-n| / max(|a|, |n|, floor), maximized.

    The floor keeps finite-difference roundoff noise (~1e-11 in double
    precision at step 1e-5) from dominating comparisons of near-zero
    gradients.
    """
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    if a.size == 0:
        return 0.0
    return float((np.abs(a - n) / denom).max())


def assert_gradients_match(
    analytic: Dict[str, np.ndarray],
    numeric: Dict[str, np.ndarray],
    rtol: float,
) -> None:
    assert set(analytic) == set(numeric)
    for name in sorted(analytic):
        err = max_relative_error(analytic[name], numeric[name])
        assert err < rtol, f"gradient mismatch for {name}: rel err {err:.3e} >= {rtol}"


def dense_masked_gat_head(
    feats: np.ndarray,
    adjacency: np.ndarray,
    w: np.ndarray,
    a: np.ndarray,
    slope: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One attention head computed through a full N x N masked softmax.

    ``adjacency`` is a dense 0/1 matrix (self-loops on the diagonal). Returns
    (coefficients, pre-activation outputs). Brute force on purpose: builds the
    entire score matrix, masks non-edges after the fact.
    """
    proj = feats @ w  # (N, F')
    fp = w.shape[1]
    n = feats.shape[0]
    scores = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            pair = np.concatenate([proj[i], proj[j]])
            raw = float(a @ pair)
            scores[i, j] = raw if raw >= 0 else slope * raw
    exp = np.exp(scores) * adjacency
    coeffs = exp / exp.sum(axis=1, keepdims=True)
    out = coeffs @ proj
    assert out.shape == (n, fp)
    return coeffs, out


def elu_oracle(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.exp(x) - 1.0)


def dense_gat_hidden_oracle(feats, adjacency, heads, slope):
    """Concat-of-ELU layer via the dense oracle; heads is [(w, a), ...]."""
    outs = []
    for w, a in heads:
        _, pre = dense_masked_gat_head(feats, adjacency, w, a, slope)
        outs.append(elu_oracle(pre))
    return np.concatenate(outs, axis=1)


def dense_gat_output_oracle(feats, adjacency, heads, slope):
    """Average-then-ReLU layer via the dense oracle."""
    pres = []
    for w, a in heads:
        _, pre = dense_masked_gat_head(feats, adjacency, w, a, slope)
        pres.append(pre)
    return np.maximum(np.mean(pres, axis=0), 0.0)


def adjacency_matrix(neighbors: list[np.ndarray], n: int) -> np.ndarray:
    """Dense 0/1 matrix from per-node neighbor index lists."""
    adj = np.zeros((n, n))
    for i, nbrs in enumerate(neighbors):
        adj[i, np.asarray(nbrs)] = 1.0
    return adj


def confusion_oracle(predicted, actual) -> tuple[int, int, int, int]:
    """Brute-force confusion counting; positive class is label 1 (fake)."""
    tp = tn = fp = fn = 0
    for p, y in zip(predicted, actual):
        if y == 1 and p == 1:
            tp += 1
        elif y == 0 and p == 0:
            tn += 1
        elif y == 0 and p == 1:
            fp += 1
        else:
            fn += 1
    return tp, tn, fp, fn


def metrics_oracle(tp: int, tn: int, fp: int, fn: int) -> tuple[float, float, float, float]:
    total = tp + tn + fp + fn
    acc = (tp + tn) / total
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * rec * prec / (rec + prec) if prec + rec else 0.0
    return acc, prec, rec, f1
