"""Artifact writers: metrics JSON, aggregate CSV, explanation JSONL, curve and
history CSVs.

Every float is serialized with exactly 6 decimal places and every file is
written as UTF-8 with bare newlines, so re-exporting identical inputs yields
byte-identical files. Metrics JSON carries the raw confusion counts; reading
it back recomputes the ratios from the counts, which round-trips the report
exactly regardless of the 6-decimal display precision.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .explain import Explanation, top_users
from .graphs import FEATURE_NAMES
from .metrics import Metrics, RunAggregate, compute_metrics
from .train import EpochStats

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    return f"{float(x):.6f}"


def to_json(obj) -> str:
    """JSON text with floats fixed at 6 decimal places, keys in insertion
    order (callers build dicts deterministically)."""
    if isinstance(obj, bool):  # bool is an int subclass; test it first
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if obj is None:
        return "null"
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = (f"{json.dumps(str(k), ensure_ascii=False)}: {to_json(v)}" for k, v in obj.items())
        return "{" + ", ".join(parts) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text(path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def write_metrics_json(metrics: Metrics, path) -> None:
    c = metrics.confusion
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "metrics",
        "n_examples": c.total,
        "confusion": {"tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn},
        "accuracy": metrics.accuracy,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "degenerate": metrics.degenerate,
    }
    write_text(path, to_json(payload) + "\n")


def read_metrics_json(path) -> Metrics:
    """Rebuild a report from its stored confusion counts (exact, independent
    of display rounding)."""
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("kind") != "metrics":
        raise ValueError(f"{path}: not a metrics file")
    c = payload["confusion"]
    y_true = [1] * (c["tp"] + c["fn"]) + [0] * (c["tn"] + c["fp"])
    y_pred = [1] * c["tp"] + [0] * c["fn"] + [0] * c["tn"] + [1] * c["fp"]
    return compute_metrics(y_true, y_pred)


def write_aggregate_csv(aggregates: Dict[str, RunAggregate], path) -> None:
    """One row per metric: run count, mean, sample std, and t-interval
    half-widths at the three standard confidence levels."""
    lines = ["metric,n_runs,mean,std,hw90,hw95,hw98"]
    for name, agg in aggregates.items():
        hw = agg.half_widths
        lines.append(
            f"{name},{agg.n_runs},{format_float(agg.mean)},{format_float(agg.std)},"
            f"{format_float(hw[0.90])},{format_float(hw[0.95])},{format_float(hw[0.98])}"
        )
    write_text(path, "\n".join(lines) + "\n")


def explanation_record(explanation: Explanation) -> dict:
    record = {
        "schema_version": SCHEMA_VERSION,
        "tweet_id": explanation.tweet_id,
        "true_label": explanation.true_label,
        "predicted_label": explanation.predicted_label,
        "probabilities": [float(p) for p in explanation.probabilities],
        "tokens": list(explanation.tokens),
        "word_weights": [float(w) for w in explanation.word_weights],
        "users": [
            {
                "user_id": u.user_id,
                "order": u.order,
                "received": u.received,
                "features": u.features,
            }
            for u in explanation.users
        ],
    }
    if explanation.users:
        best = top_users(explanation, 1)[0]
        record["top_user"] = {
            "user_id": best.user_id,
            "order": best.order,
            "received": best.received,
            "features": best.features,
        }
    else:
        record["top_user"] = None
    return record


def write_explanations_jsonl(explanations: Sequence[Explanation], path) -> None:
    lines = [to_json(explanation_record(e)) for e in explanations]
    write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def write_top_users_csv(explanations: Sequence[Explanation], k: int, path) -> None:
    header = "tweet_id,rank,user_id,order,received," + ",".join(FEATURE_NAMES)
    lines = [header]
    for e in explanations:
        if not e.users:
            continue
        for rank, u in enumerate(top_users(e, k), start=1):
            feats = ",".join(format_float(u.features[name]) for name in FEATURE_NAMES)
            lines.append(
                f"{e.tweet_id},{rank},{u.user_id},{u.order},{format_float(u.received)},{feats}"
            )
    write_text(path, "\n".join(lines) + "\n")


def write_edge_coeffs_csv(
    entries: Sequence[Tuple[str, int, int, str, str, float]], path
) -> None:
    """Rows of (tweet_id, layer, head, src_user, dst_user, coeff)."""
    lines = ["tweet_id,layer,head,src_user,dst_user,coeff"]
    for tweet_id, layer, head, src, dst, coeff in entries:
        lines.append(f"{tweet_id},{layer},{head},{src},{dst},{format_float(coeff)}")
    write_text(path, "\n".join(lines) + "\n")


def write_curve_csv(points: Sequence[Tuple[float, float]], path) -> None:
    """Early-detection curve: ascending fractions, one accuracy per row."""
    lines = ["fraction,accuracy"]
    for fraction, accuracy in sorted(points, key=lambda p: p[0]):
        lines.append(f"{format_float(fraction)},{format_float(accuracy)}")
    write_text(path, "\n".join(lines) + "\n")


def write_history_csv(history: Sequence[EpochStats], path) -> None:
    lines = ["epoch,train_loss,train_acc,val_acc"]
    for h in history:
        lines.append(
            f"{h.epoch},{format_float(h.train_loss)},{format_float(h.train_acc)},"
            f"{format_float(h.val_acc)}"
        )
    write_text(path, "\n".join(lines) + "\n")


def export_report(
    out_dir,
    *,
    metrics: Optional[Metrics] = None,
    aggregates: Optional[Dict[str, RunAggregate]] = None,
    explanations: Optional[Sequence[Explanation]] = None,
    curve: Optional[Sequence[Tuple[float, float]]] = None,
) -> List[Path]:
    """Write whichever artifacts are supplied; returns the paths written."""
    out = Path(out_dir)
    written: List[Path] = []
    if metrics is not None:
        p = out / "metrics.json"
        write_metrics_json(metrics, p)
        written.append(p)
    if aggregates is not None:
        p = out / "aggregate.csv"
        write_aggregate_csv(aggregates, p)
        written.append(p)
    if explanations is not None:
        p = out / "explanations.jsonl"
        write_explanations_jsonl(explanations, p)
        written.append(p)
    if curve is not None:
        p = out / "curve.csv"
        write_curve_csv(curve, p)
        written.append(p)
    return written
