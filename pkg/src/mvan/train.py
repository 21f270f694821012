"""Mini-batch training loop with early stopping.

Batches are formed from a fresh labeled shuffle stream each epoch, the last
batch may be short, and the batch loss is the mean of per-example losses.
A held-out slice of the training set (``val_fraction``) drives early
stopping: training stops after ``patience`` consecutive epochs without a new
best validation accuracy (``patience = 0`` disables early stopping), and the
parameters from the best epoch are restored. With ``val_fraction = 0`` the training accuracy itself is the
selection signal and is reported in the ``val_acc`` column.

Every random choice (validation split, epoch shuffles, dropout masks) comes
from labeled streams of one seed tree, so a repeated call with equal inputs
reproduces the exact same parameter trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import NonFiniteError
from .config import TrainerConfig
from .dataset import PreparedExample
from .metrics import Metrics, compute_metrics
from .model import MVANModel
from .optim import AdamHyper, AdamState, adam_step
from .rng import RngTree


class TrainingDivergedError(Exception):
    """A non-finite value appeared during optimization."""


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float


@dataclass
class TrainedModel:
    model: MVANModel
    history: List[EpochStats]
    best_epoch: int
    parameters: Dict[str, np.ndarray]  # snapshot of the restored best epoch


def _accuracy(model: MVANModel, examples: Sequence[PreparedExample]) -> float:
    if not examples:
        return 0.0
    hits = sum(model.predict(ex).label == ex.label for ex in examples)
    return hits / len(examples)


def evaluate_model(model: MVANModel, examples: Sequence[PreparedExample]) -> Metrics:
    y_true = [ex.label for ex in examples]
    y_pred = [model.predict(ex).label for ex in examples]
    return compute_metrics(y_true, y_pred)


def train_model(
    model: MVANModel,
    train_examples: Sequence[PreparedExample],
    config: TrainerConfig,
    tree: RngTree,
) -> TrainedModel:
    config.validate()
    if not train_examples:
        raise ValueError("cannot train on zero examples")

    params = model.params()
    tensors = list(params.values())
    state = AdamState(tensors)
    hyper = AdamHyper(learning_rate=config.learning_rate)

    n = len(train_examples)
    n_val = int(config.val_fraction * n)
    perm = tree.stream("val_split").permutation(n)
    val = [train_examples[i] for i in perm[:n_val]]
    fit = [train_examples[i] for i in perm[n_val:]]
    if not fit:
        raise ValueError("validation split consumed every training example")

    dropout_tree = tree.child("dropout")
    history: List[EpochStats] = []
    best_select = -np.inf
    best_epoch = -1
    best_params = model.parameter_arrays()
    since_best = 0

    for epoch in range(config.epochs):
        order = tree.stream(f"shuffle/epoch{epoch}").permutation(len(fit))
        loss_total = 0.0
        try:
            for batch_index, start in enumerate(range(0, len(fit), config.batch_size)):
                batch = [fit[i] for i in order[start : start + config.batch_size]]
                rng = dropout_tree.stream(f"epoch{epoch}/batch{batch_index}")
                losses = [
                    ad.cross_entropy_with_logits(
                        model.forward(ex, training=True, rng=rng).logits, ex.label
                    )
                    for ex in batch
                ]
                total = losses[0]
                for extra in losses[1:]:
                    total = ad.add(total, extra)
                batch_loss = ad.scale(total, 1.0 / len(batch))
                grads = ad.gradient(batch_loss, tensors)
                adam_step(state, grads, hyper)
                loss_total += batch_loss.item() * len(batch)
            train_acc = _accuracy(model, fit)
            val_acc = _accuracy(model, val) if val else train_acc
        except NonFiniteError as exc:
            raise TrainingDivergedError(
                f"training diverged at epoch {epoch}: {exc}"
            ) from exc

        history.append(
            EpochStats(
                epoch=epoch,
                train_loss=loss_total / len(fit),
                train_acc=train_acc,
                val_acc=val_acc,
            )
        )

        if val_acc > best_select:
            best_select = val_acc
            best_epoch = epoch
            best_params = model.parameter_arrays()
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience > 0:
                break

    model.load_parameter_arrays(best_params)
    return TrainedModel(
        model=model, history=history, best_epoch=best_epoch, parameters=best_params
    )
