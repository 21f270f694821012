"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every operation evaluates eagerly and records itself on the implicit tape: a
result tensor keeps references to its parents plus a closure that maps the
output gradient to parent gradients. ``gradient`` walks that record in reverse
topological order. One generic mechanism serves both encoders, so composite
layers (GRU cells, attention blocks) never need hand-derived backward passes.

All data is double precision. Every public operation validates shapes up
front and checks its output for non-finite values, so a diverging model fails
loudly at the op that produced the first inf/nan.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit


class AutodiffError(Exception):
    """Base class for tensor-math failures."""


class ShapeError(AutodiffError):
    """Operand shapes are inconsistent for the requested operation."""


class NonFiniteError(AutodiffError):
    """An operation produced inf or nan."""


class Tensor:
    """A node of the differentiation record.

    Leaves are created directly (``constant``/``parameter``); interior nodes
    are created by the ops below and carry a backward closure. ``data`` is
    treated as immutable by all ops; only the optimizer rewrites parameter
    arrays, and it owns them exclusively while training.
    """

    __slots__ = ("data", "parents", "backward", "name", "trainable")

    def __init__(self, data, parents=(), backward=None, name=None, trainable=False):
        arr = np.asarray(data, dtype=np.float64)
        _require_finite("tensor", arr)
        self.data = arr
        self.parents = parents
        self.backward = backward
        self.name = name
        self.trainable = trainable

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item: tensor of shape {self.data.shape} is not scalar")
        return float(self.data.reshape(()))

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)


def _require_finite(op: str, arr: np.ndarray) -> None:
    # Sum-based probe: any nan/inf in arr makes the sum non-finite. (A sum of
    # huge finite values can also overflow; that false positive is acceptable
    # because it only ever aborts, never silently passes a bad value.)
    if arr.size and not math.isfinite(float(np.sum(arr))):
        raise NonFiniteError(f"{op}: produced non-finite values")


def _node(op: str, data: np.ndarray, parents, backward) -> Tensor:
    t = Tensor.__new__(Tensor)
    _require_finite(op, data)
    t.data = data
    t.parents = parents
    t.backward = backward
    t.name = None
    t.trainable = False
    return t


def constant(data) -> Tensor:
    return Tensor(data)


def parameter(name: str, data) -> Tensor:
    return Tensor(data, name=name, trainable=True)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.data.shape, b.data.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.data.shape} and {b.data.shape} do not broadcast")


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast("add", a, b)
    data = a.data + b.data
    ash, bsh = a.data.shape, b.data.shape

    def backward(g):
        return _unbroadcast(g, ash), _unbroadcast(g, bsh)

    return _node("add", data, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast("sub", a, b)
    data = a.data - b.data
    ash, bsh = a.data.shape, b.data.shape

    def backward(g):
        return _unbroadcast(g, ash), _unbroadcast(-g, bsh)

    return _node("sub", data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast("mul", a, b)
    data = a.data * b.data
    ad, bd = a.data, b.data

    def backward(g):
        return _unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)

    return _node("mul", data, (a, b), backward)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    data = a.data * c

    def backward(g):
        return (g * c,)

    return _node("scale", data, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    ad, bd = a.data, b.data
    if ad.ndim == 0 or bd.ndim == 0 or ad.ndim > 2 or bd.ndim > 2:
        raise ShapeError(f"matmul: unsupported ranks {ad.shape} @ {bd.shape}")
    if ad.shape[-1] != bd.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {ad.shape} @ {bd.shape}")
    data = ad @ bd

    if ad.ndim == 1 and bd.ndim == 1:

        def backward(g):
            return g * bd, g * ad

    elif ad.ndim == 1:  # (n,) @ (n,m) -> (m,)

        def backward(g):
            return bd @ g, np.outer(ad, g)

    elif bd.ndim == 1:  # (n,m) @ (m,) -> (n,)

        def backward(g):
            return np.outer(g, bd), ad.T @ g

    else:

        def backward(g):
            return g @ bd.T, ad.T @ g

    return _node("matmul", data, (a, b), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("concat: empty input")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        moved = np.moveaxis(g, axis, 0)
        return tuple(
            np.moveaxis(moved[offsets[i]:offsets[i + 1]], 0, axis) for i in range(len(sizes))
        )

    return _node("concat", data, tuple(tensors), backward)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack same-shape tensors along a new leading axis."""
    if not tensors:
        raise ShapeError("stack: empty input")
    shape = tensors[0].data.shape
    for t in tensors:
        if t.data.shape != shape:
            raise ShapeError(f"stack: mixed shapes {shape} and {t.data.shape}")
    data = np.stack([t.data for t in tensors])

    def backward(g):
        return tuple(g[i] for i in range(len(tensors)))

    return _node("stack", data, tuple(tensors), backward)


def row(mat: Tensor, i: int) -> Tensor:
    if mat.data.ndim != 2:
        raise ShapeError(f"row: expected matrix, got shape {mat.data.shape}")
    data = mat.data[i].copy()
    shape = mat.data.shape

    def backward(g):
        out = np.zeros(shape)
        out[i] = g
        return (out,)

    return _node("row", data, (mat,), backward)


def take(t: Tensor, indices) -> Tensor:
    """Gather along axis 0 (rows of a matrix or entries of a vector)."""
    idx = np.asarray(indices, dtype=np.intp)
    data = t.data[idx]
    shape = t.data.shape

    def backward(g):
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return _node("take", data, (t,), backward)


def narrow(t: Tensor, start: int, length: int) -> Tensor:
    """Contiguous slice [start, start+length) along axis 0."""
    if start < 0 or start + length > t.data.shape[0]:
        raise ShapeError(f"narrow: [{start}, {start + length}) out of range for {t.data.shape}")
    data = t.data[start:start + length].copy()
    shape = t.data.shape

    def backward(g):
        out = np.zeros(shape)
        out[start:start + length] = g
        return (out,)

    return _node("narrow", data, (t,), backward)


def reshape(t: Tensor, shape) -> Tensor:
    old = t.data.shape
    data = t.data.reshape(shape)

    def backward(g):
        return (g.reshape(old),)

    return _node("reshape", data, (t,), backward)


def sum_all(t: Tensor) -> Tensor:
    data = np.asarray(t.data.sum())
    shape = t.data.shape

    def backward(g):
        return (np.full(shape, float(g)),)

    return _node("sum", data, (t,), backward)


def mean_all(t: Tensor) -> Tensor:
    n = t.data.size
    data = np.asarray(t.data.mean())
    shape = t.data.shape

    def backward(g):
        return (np.full(shape, float(g) / n),)

    return _node("mean", data, (t,), backward)


def mean_axis0(t: Tensor) -> Tensor:
    if t.data.ndim != 2:
        raise ShapeError(f"mean_axis0: expected matrix, got {t.data.shape}")
    n = t.data.shape[0]
    data = t.data.mean(axis=0)

    def backward(g):
        return (np.tile(g / n, (n, 1)),)

    return _node("mean_axis0", data, (t,), backward)


def max_axis0(t: Tensor) -> Tensor:
    if t.data.ndim != 2:
        raise ShapeError(f"max_axis0: expected matrix, got {t.data.shape}")
    idx = np.argmax(t.data, axis=0)  # ties: first row wins
    data = t.data[idx, np.arange(t.data.shape[1])]
    shape = t.data.shape

    def backward(g):
        out = np.zeros(shape)
        out[idx, np.arange(shape[1])] = g
        return (out,)

    return _node("max_axis0", data, (t,), backward)


def sigmoid(t: Tensor) -> Tensor:
    data = expit(t.data)

    def backward(g):
        return (g * data * (1.0 - data),)

    return _node("sigmoid", data, (t,), backward)


def tanh(t: Tensor) -> Tensor:
    data = np.tanh(t.data)

    def backward(g):
        return (g * (1.0 - data * data),)

    return _node("tanh", data, (t,), backward)


def relu(t: Tensor) -> Tensor:
    data = np.maximum(t.data, 0.0)
    pos = t.data > 0

    def backward(g):
        return (g * pos,)

    return _node("relu", data, (t,), backward)


def elu(t: Tensor, alpha: float = 1.0) -> Tensor:
    x = t.data
    # expm1 only on the negative branch; where() evaluates both and large
    # positive inputs would overflow in the discarded one
    data = np.where(x > 0, x, alpha * np.expm1(np.minimum(x, 0.0)))

    def backward(g):
        return (g * np.where(x > 0, 1.0, data + alpha),)

    return _node("elu", data, (t,), backward)


def leaky_relu(t: Tensor, slope: float = 0.3) -> Tensor:
    x = t.data
    data = np.where(x >= 0, x, slope * x)

    def backward(g):
        return (g * np.where(x >= 0, 1.0, slope),)

    return _node("leaky_relu", data, (t,), backward)


def softmax(t: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax: shifts by the per-slice max before exp."""
    x = t.data
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * data).sum(axis=axis, keepdims=True)
        return ((g - inner) * data,)

    return _node("softmax", data, (t,), backward)


def cross_entropy_with_logits(logits: Tensor, label: int) -> Tensor:
    """-log softmax(logits)[label], in log-sum-exp form."""
    x = logits.data
    if x.ndim != 1:
        raise ShapeError(f"cross_entropy_with_logits: expected vector, got {x.shape}")
    if not 0 <= label < x.shape[0]:
        raise ShapeError(f"cross_entropy_with_logits: label {label} out of range {x.shape}")
    m = x.max()
    e = np.exp(x - m)
    z = e.sum()
    data = np.asarray(m + np.log(z) - x[label])
    probs = e / z

    def backward(g):
        out = probs * float(g)
        out[label] -= float(g)
        return (out,)

    return _node("cross_entropy_with_logits", data, (logits,), backward)


def dropout(t: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: zero with probability ``rate``, scale survivors by 1/(1-rate).

    Identity when not training or rate == 0. The mask comes only from the
    supplied stream.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout: rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return t
    keep = rng.random(t.data.shape) >= rate
    factor = keep / (1.0 - rate)
    data = t.data * factor

    def backward(g):
        return (g * factor,)

    return _node("dropout", data, (t,), backward)


def _toposort(root: Tensor) -> list:
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def gradient(loss: Tensor, params: Iterable[Tensor]) -> dict:
    """d(loss)/d(param) for every requested leaf, by reverse accumulation.

    The loss must be scalar. Parameters the loss does not depend on get zero
    gradients, matching what finite differences would report.
    """
    if loss.data.size != 1:
        raise ShapeError(f"gradient: loss must be scalar, got shape {loss.data.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(_toposort(loss)):
        if node.backward is None:
            continue
        g = grads.pop(id(node), None)
        if g is None:
            continue
        for parent, pg in zip(node.parents, node.backward(g)):
            if pg is None:
                continue
            acc = grads.get(id(parent))
            # backward closures may hand back shared arrays; never add in place
            grads[id(parent)] = pg if acc is None else acc + pg
    return {p: grads.get(id(p), np.zeros_like(p.data)) for p in params}
