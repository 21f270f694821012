"""Adam with bias-corrected moment estimates.

State lives outside the tensors: one pair of moment arrays per parameter plus
a shared step counter. ``adam_step`` rewrites parameter arrays in place; the
tape guarantees ops never hold views of parameter data, so in-place updates
are safe between forward passes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable

import numpy as np

from .autodiff import Tensor


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


class AdamState:
    """First/second moment accumulators for a fixed set of parameters."""

    def __init__(self, params: Iterable[Tensor]):
        self.params = list(params)
        self.step = 0
        self.m = {id(p): np.zeros_like(p.data) for p in self.params}
        self.v = {id(p): np.zeros_like(p.data) for p in self.params}


def adam_step(state: AdamState, grads: Dict[Tensor, np.ndarray], hyper: AdamHyper) -> None:
    """One update over every parameter in ``state``.

    Every parameter must have an entry in ``grads``; a missing one indicates
    the caller differentiated a different parameter set, which is a bug worth
    failing on rather than silently freezing weights.
    """
    missing = [p for p in state.params if p not in grads]
    if missing:
        names = ", ".join(str(p.name) for p in missing)
        raise ValueError(f"adam_step: no gradient supplied for parameter(s): {names}")
    state.step += 1
    t = state.step
    bc1 = 1.0 - hyper.beta1 ** t
    bc2 = 1.0 - hyper.beta2 ** t
    for p in state.params:
        g = grads[p]
        if g.shape != p.data.shape:
            raise ValueError(
                f"adam_step: gradient shape {g.shape} != parameter shape "
                f"{p.data.shape} for {p.name}"
            )
        m = state.m[id(p)]
        v = state.v[id(p)]
        m *= hyper.beta1
        m += (1.0 - hyper.beta1) * g
        v *= hyper.beta2
        v += (1.0 - hyper.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        p.data -= hyper.learning_rate * m_hat / (np.sqrt(v_hat) + hyper.epsilon)
