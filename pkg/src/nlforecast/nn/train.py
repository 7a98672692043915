"""Mini-batch training loop with per-epoch loss records and early stopping."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .adam import AdamState, adam_step
from .model import LstmModel, loss_and_grads, mse_loss, predict

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    early_stop_patience: int | None = None
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.early_stop_patience is not None and self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1 or None")


@dataclass(frozen=True)
class TrainRecord:
    epoch: int
    train_loss: float
    val_loss: float


def train_epochs(model: LstmModel, train_x, train_y, val_x, val_y, config: TrainConfig,
                 rng: np.random.Generator | None = None):
    """Train ``model`` in place; returns ``(model, records)``.

    ``train_loss`` is the sample-weighted mean of train-mode batch MSE over the
    epoch (data term only, without the L2 penalty); ``val_loss`` is the
    eval-mode MSE on the validation set.  With early stopping the parameters
    of the best validation epoch are restored at the end.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    val_x = np.asarray(val_x, dtype=np.float64)
    val_y = np.asarray(val_y, dtype=np.float64)
    if len(train_x) == 0 or len(val_x) == 0:
        raise ValueError("training and validation sets must be non-empty")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    state = AdamState.for_params(model.params, lr=config.lr, beta1=config.beta1,
                                 beta2=config.beta2, epsilon=config.epsilon)
    records: list[TrainRecord] = []
    best = (np.inf, -1, None)
    n = len(train_x)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            mse, grads, cache = loss_and_grads(model, train_x[idx], train_y[idx], rng=rng)
            model.update_running_stats(cache)
            adam_step(model.params, grads, state)
            total += mse * len(idx)
        val_loss = mse_loss(predict(model, val_x), val_y)
        rec = TrainRecord(epoch, total / n, val_loss)
        records.append(rec)
        log.debug("epoch %d train %.6f val %.6f", epoch, rec.train_loss, rec.val_loss)
        if not np.isfinite(rec.train_loss) or not np.isfinite(val_loss):
            raise FloatingPointError(f"non-finite loss at epoch {epoch}")
        if config.early_stop_patience is not None:
            if val_loss < best[0]:
                best = (val_loss, epoch, model.copy())
            elif epoch - best[1] >= config.early_stop_patience:
                log.info("early stop at epoch %d (best %d)", epoch, best[1])
                break
    if config.early_stop_patience is not None and best[2] is not None:
        model.params = best[2].params
        model.buffers = best[2].buffers
    return model, records
