"""From-scratch stacked-LSTM regression engine (numpy, float64)."""

from .adam import AdamState, adam_step
from .gradcheck import gradient_check, numeric_gradients, relative_error
from .model import (
    ForwardCache,
    LstmLayerParams,
    LstmModel,
    ModelConfig,
    backward,
    dropout_masks,
    forward,
    l2_penalty,
    loss_and_grads,
    lstm_cell_forward,
    mse_grad,
    mse_loss,
    predict,
)
from .serialize import SnapshotError, load_snapshot, save_snapshot
from .train import TrainConfig, TrainRecord, train_epochs

__all__ = [
    "AdamState",
    "ForwardCache",
    "LstmLayerParams",
    "LstmModel",
    "ModelConfig",
    "SnapshotError",
    "TrainConfig",
    "TrainRecord",
    "adam_step",
    "backward",
    "dropout_masks",
    "forward",
    "gradient_check",
    "l2_penalty",
    "load_snapshot",
    "loss_and_grads",
    "lstm_cell_forward",
    "mse_grad",
    "mse_loss",
    "numeric_gradients",
    "predict",
    "relative_error",
    "save_snapshot",
    "train_epochs",
]
