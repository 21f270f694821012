"""Binary classification metrics and multi-run aggregation.

Label 1 (fake news) is the positive class. A zero denominator (no predicted
positives, no actual positives, or precision + recall = 0) yields a metric of
0.0 with the ``degenerate`` flag set rather than an exception, so sweeps over
weak models never crash mid-run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats as _scipy_stats

DEFAULT_CONFIDENCES = (0.90, 0.95, 0.98)


@dataclass(frozen=True)
class Confusion:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: Confusion
    degenerate: bool  # True when any ratio had a zero denominator


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> Confusion:
    true = np.asarray(y_true)
    pred = np.asarray(y_pred)
    if true.shape != pred.shape or true.ndim != 1:
        raise ValueError(
            f"label vectors must be 1-d and equal length, got {true.shape} and {pred.shape}"
        )
    if true.size == 0:
        raise ValueError("cannot score zero predictions")
    for name, arr in (("y_true", true), ("y_pred", pred)):
        bad = np.setdiff1d(arr, [0, 1])
        if bad.size:
            raise ValueError(f"{name} contains non-binary labels: {bad.tolist()}")
    return Confusion(
        tp=int(np.sum((true == 1) & (pred == 1))),
        tn=int(np.sum((true == 0) & (pred == 0))),
        fp=int(np.sum((true == 0) & (pred == 1))),
        fn=int(np.sum((true == 1) & (pred == 0))),
    )


def compute_metrics(y_true: Sequence[int], y_pred: Sequence[int]) -> Metrics:
    c = confusion(y_true, y_pred)
    degenerate = False

    def ratio(num: int, den: int) -> float:
        nonlocal degenerate
        if den == 0:
            degenerate = True
            return 0.0
        return num / den

    accuracy = (c.tp + c.tn) / c.total
    precision = ratio(c.tp, c.tp + c.fp)
    recall = ratio(c.tp, c.tp + c.fn)
    if precision + recall == 0.0:
        degenerate = True
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        confusion=c,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class RunAggregate:
    n_runs: int
    mean: float
    std: float  # sample standard deviation (n - 1 denominator)
    half_widths: Dict[float, float]  # confidence level -> t-interval half-width


def aggregate_runs(
    values: Sequence[float],
    confidences: Tuple[float, ...] = DEFAULT_CONFIDENCES,
) -> RunAggregate:
    """Mean, sample std, and Student-t confidence half-widths over runs."""
    vals = np.asarray(values, dtype=np.float64)
    n = vals.size
    if n < 2:
        raise ValueError(f"aggregation needs at least 2 runs, got {n}")
    for c in confidences:
        if not 0.0 < c < 1.0:
            raise ValueError(f"confidence level {c} outside (0, 1)")
    mean = float(vals.mean())
    std = float(vals.std(ddof=1))
    half_widths = {
        c: float(_scipy_stats.t.ppf((1.0 + c) / 2.0, n - 1) * std / math.sqrt(n))
        for c in confidences
    }
    return RunAggregate(n_runs=n, mean=mean, std=std, half_widths=half_widths)


def format_interval(mean: float, half_width: float) -> str:
    """Table presentation: mean to 4 decimals, half-width to 3."""
    return f"{mean:.4f} ± {half_width:.3f}"
