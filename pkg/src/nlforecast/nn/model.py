"""Stacked LSTM regressor with batch normalization, dropout and a linear head.

Layout of one forward pass for an input batch ``(B, T, F)``::

    LSTM(H) -> BatchNorm -> Dropout    (x3)
    last time step -> Dense(D, linear) -> Dense(1, linear)

Batch normalization pools statistics over batch and time.  Everything is
computed in float64 and kept time-major internally so per-step slices are
contiguous for the gate kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._kernels import lstm_gates_backward, lstm_gates_forward

N_LSTM_LAYERS = 3


@dataclass(frozen=True)
class ModelConfig:
    n_features: int = 5
    hidden: tuple[int, ...] = (32, 32, 32)
    dense: int = 32
    dropout: float = 0.4
    l2: float = 0.001
    bn_momentum: float = 0.99
    bn_eps: float = 1e-3

    def __post_init__(self):
        if len(self.hidden) != N_LSTM_LAYERS:
            raise ValueError(f"expected {N_LSTM_LAYERS} LSTM layer widths, got {len(self.hidden)}")
        if self.n_features < 1 or self.dense < 1 or min(self.hidden) < 1:
            raise ValueError("layer sizes must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.l2 < 0:
            raise ValueError(f"l2 coefficient must be >= 0, got {self.l2}")
        if not 0.0 <= self.bn_momentum < 1.0 or self.bn_eps <= 0:
            raise ValueError("invalid batch-norm settings")

    @classmethod
    def uniform(cls, hidden: int, **kwargs) -> "ModelConfig":
        return cls(hidden=(hidden,) * N_LSTM_LAYERS, **kwargs)


@dataclass
class LstmLayerParams:
    """Weights of one LSTM layer; gate blocks are stacked as i, f, g, o."""

    W: np.ndarray  # (4H, F)
    U: np.ndarray  # (4H, H)
    b: np.ndarray  # (4H,)

    def __post_init__(self):
        four_h = self.U.shape[0]
        if (four_h % 4 or self.U.shape != (four_h, four_h // 4)
                or self.W.shape[0] != four_h or self.b.shape != (four_h,)):
            raise ValueError("inconsistent LSTM parameter shapes")

    @property
    def hidden(self) -> int:
        return self.U.shape[1]


def lstm_cell_forward(x, h, c, params: LstmLayerParams):
    """One LSTM step for a single sample (vectors) or a batch (rows)."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    single = x.ndim == 1
    x2, h2, c2 = np.atleast_2d(x), np.atleast_2d(h), np.atleast_2d(c)
    H = params.hidden
    if x2.shape[1] != params.W.shape[1] or h2.shape[1] != H or c2.shape[1] != H:
        raise ValueError("shape mismatch in lstm_cell_forward")
    z = np.ascontiguousarray(x2 @ params.W.T + h2 @ params.U.T + params.b)
    _, c_new, _, h_new = lstm_gates_forward(z, np.ascontiguousarray(c2))
    if single:
        return h_new[0], c_new[0]
    return h_new, c_new


def _glorot(rng, fan_out, fan_in):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


@dataclass
class LstmModel:
    config: ModelConfig
    params: dict[str, np.ndarray]
    buffers: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def initialize(cls, config: ModelConfig, rng: np.random.Generator) -> "LstmModel":
        params: dict[str, np.ndarray] = {}
        buffers: dict[str, np.ndarray] = {}
        fan_in = config.n_features
        for layer, H in enumerate(config.hidden):
            params[f"lstm{layer}.W"] = _glorot(rng, 4 * H, fan_in)
            params[f"lstm{layer}.U"] = _glorot(rng, 4 * H, H)
            bias = np.zeros(4 * H)
            bias[H:2 * H] = 1.0  # forget gate
            params[f"lstm{layer}.b"] = bias
            params[f"bn{layer}.gamma"] = np.ones(H)
            params[f"bn{layer}.beta"] = np.zeros(H)
            buffers[f"bn{layer}.running_mean"] = np.zeros(H)
            buffers[f"bn{layer}.running_var"] = np.ones(H)
            fan_in = H
        params["dense.W"] = _glorot(rng, config.dense, fan_in)
        params["dense.b"] = np.zeros(config.dense)
        params["out.W"] = _glorot(rng, 1, config.dense)
        params["out.b"] = np.zeros(1)
        return cls(config, params, buffers)

    def layer(self, index: int) -> LstmLayerParams:
        p = self.params
        return LstmLayerParams(p[f"lstm{index}.W"], p[f"lstm{index}.U"], p[f"lstm{index}.b"])

    def copy(self) -> "LstmModel":
        return LstmModel(
            self.config,
            {k: v.copy() for k, v in self.params.items()},
            {k: v.copy() for k, v in self.buffers.items()},
        )

    @property
    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    def update_running_stats(self, cache: "ForwardCache") -> None:
        """Fold the batch statistics of a train-mode pass into the running ones."""
        if not cache.batch_stats:
            return
        m = self.config.bn_momentum
        for layer, lc in enumerate(cache.layers):
            rm = self.buffers[f"bn{layer}.running_mean"]
            rv = self.buffers[f"bn{layer}.running_var"]
            rm *= m
            rm += (1.0 - m) * lc.mean
            rv *= m
            rv += (1.0 - m) * lc.var


@dataclass
class _LayerCache:
    inputs: np.ndarray  # (T, B, F) input to the LSTM
    acts: np.ndarray  # (T, B, 4H)
    cells: np.ndarray  # (T, B, H)
    tanh_cells: np.ndarray  # (T, B, H)
    hidden: np.ndarray  # (T, B, H) LSTM output before batch norm
    xhat: np.ndarray  # (T*B, H)
    mean: np.ndarray
    var: np.ndarray
    inv_std: np.ndarray
    mask: np.ndarray | None  # dropout multiplier, already scaled by 1/(1-p)


@dataclass
class ForwardCache:
    layers: list[_LayerCache]
    last: np.ndarray  # (B, H) final layer output at the last step
    dense_out: np.ndarray  # (B, D)
    batch_stats: bool
    training: bool
    params_id: int = 0
    consumed: bool = False


def dropout_masks(model: LstmModel, batch_size: int, window: int, rng: np.random.Generator):
    """Draw inverted-dropout multipliers for every LSTM layer output."""
    p = model.config.dropout
    masks = []
    for H in model.config.hidden:
        keep = rng.random((window, batch_size, H)) >= p
        masks.append(keep / (1.0 - p))
    return masks


def forward(model: LstmModel, batch, *, training: bool, rng: np.random.Generator | None = None,
            masks=None, batch_stats: bool | None = None):
    """Run the network on ``batch`` of shape ``(B, T, F)``.

    In training mode dropout is active (masks drawn from ``rng`` unless
    ``masks`` is given) and batch norm uses batch statistics.  ``batch_stats``
    overrides the batch-norm choice independently of dropout.  The model is
    not modified; call :meth:`LstmModel.update_running_stats` to apply the
    running-statistic update.

    Returns ``(predictions, cache)``.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != model.config.n_features or x.shape[1] < 1:
        raise ValueError(f"expected batch of shape (B, T, {model.config.n_features}), got {x.shape}")
    B, T, _ = x.shape
    cfg = model.config
    if batch_stats is None:
        batch_stats = training
    use_dropout = training and cfg.dropout > 0.0
    if use_dropout and masks is None:
        if rng is None:
            raise ValueError("training-mode forward with dropout needs an rng or explicit masks")
        masks = dropout_masks(model, B, T, rng)
    p = model.params

    seq = np.ascontiguousarray(x.transpose(1, 0, 2))
    layers = []
    for layer, H in enumerate(cfg.hidden):
        W, U, b = p[f"lstm{layer}.W"], p[f"lstm{layer}.U"], p[f"lstm{layer}.b"]
        F = seq.shape[2]
        xw = (seq.reshape(T * B, F) @ W.T + b).reshape(T, B, 4 * H)
        acts = np.empty((T, B, 4 * H))
        cells = np.empty((T, B, H))
        tcs = np.empty((T, B, H))
        hs = np.empty((T, B, H))
        UT = np.ascontiguousarray(U.T)
        z = np.empty((B, 4 * H))
        lstm_gates_forward(np.ascontiguousarray(xw[0]), np.zeros((B, H)),
                           acts[0], cells[0], tcs[0], hs[0])
        for t in range(1, T):
            np.matmul(hs[t - 1], UT, out=z)
            z += xw[t]
            lstm_gates_forward(z, cells[t - 1], acts[t], cells[t], tcs[t], hs[t])

        flat = hs.reshape(T * B, H)
        if batch_stats:
            mean = flat.mean(axis=0)
            var = flat.var(axis=0)
        else:
            mean = model.buffers[f"bn{layer}.running_mean"]
            var = model.buffers[f"bn{layer}.running_var"]
        inv_std = 1.0 / np.sqrt(var + cfg.bn_eps)
        xhat = (flat - mean) * inv_std
        y = xhat * p[f"bn{layer}.gamma"] + p[f"bn{layer}.beta"]
        mask = None
        if use_dropout:
            mask = np.asarray(masks[layer], dtype=np.float64)
            if mask.shape != (T, B, H):
                raise ValueError(f"dropout mask for layer {layer} has shape {mask.shape}")
            y = y * mask.reshape(T * B, H)
        layers.append(_LayerCache(seq, acts, cells, tcs, hs, xhat, mean, var, inv_std, mask))
        seq = y.reshape(T, B, H)

    last = seq[-1]
    dense_out = last @ p["dense.W"].T + p["dense.b"]
    pred = dense_out @ p["out.W"][0] + p["out.b"][0]
    cache = ForwardCache(layers, last, dense_out, batch_stats, training, id(model.params))
    return pred, cache


def mse_loss(predictions, targets) -> float:
    pred = np.asarray(predictions, dtype=np.float64)
    tgt = np.asarray(targets, dtype=np.float64)
    if pred.shape != tgt.shape or pred.ndim != 1:
        raise ValueError("predictions and targets must be equal-length vectors")
    if pred.size == 0:
        raise ValueError("empty batch")
    diff = pred - tgt
    return float(diff @ diff / diff.size)


def mse_grad(predictions, targets) -> np.ndarray:
    pred = np.asarray(predictions, dtype=np.float64)
    return 2.0 * (pred - np.asarray(targets, dtype=np.float64)) / pred.size


def l2_penalty(model: LstmModel) -> float:
    """lambda * sum of squares of LSTM input and recurrent weights."""
    total = 0.0
    for layer in range(N_LSTM_LAYERS):
        for name in ("W", "U"):
            w = model.params[f"lstm{layer}.{name}"].ravel()
            total += float(w @ w)
    return model.config.l2 * total


def backward(model: LstmModel, cache: ForwardCache, dpred) -> dict[str, np.ndarray]:
    """Gradients of ``loss + l2_penalty`` for every parameter.

    ``dpred`` is dLoss/dPrediction for the batch (e.g. :func:`mse_grad`).
    """
    if cache is None or cache.consumed or cache.params_id != id(model.params):
        raise ValueError("backward needs a fresh cache from forward() on this model")
    cfg = model.config
    p = model.params
    dpred = np.asarray(dpred, dtype=np.float64)
    B = cache.last.shape[0]
    if dpred.shape != (B,):
        raise ValueError(f"loss gradient must have shape ({B},), got {dpred.shape}")
    grads: dict[str, np.ndarray] = {}

    grads["out.W"] = (dpred @ cache.dense_out)[None, :]
    grads["out.b"] = np.array([dpred.sum()])
    d_dense = np.outer(dpred, p["out.W"][0])
    grads["dense.W"] = d_dense.T @ cache.last
    grads["dense.b"] = d_dense.sum(axis=0)
    d_last = d_dense @ p["dense.W"]

    T = cache.layers[0].hidden.shape[0]
    d_seq = None
    for layer in reversed(range(N_LSTM_LAYERS)):
        lc = cache.layers[layer]
        H = cfg.hidden[layer]
        N = T * B
        if d_seq is None:
            dy = np.zeros((T, B, H))
            dy[-1] = d_last
            dy = dy.reshape(N, H)
        else:
            dy = d_seq.reshape(N, H)
        if lc.mask is not None:
            dy = dy * lc.mask.reshape(N, H)

        gamma = p[f"bn{layer}.gamma"]
        grads[f"bn{layer}.gamma"] = (dy * lc.xhat).sum(axis=0)
        grads[f"bn{layer}.beta"] = dy.sum(axis=0)
        dxhat = dy * gamma
        if cache.batch_stats:
            dh_all = (lc.inv_std / N) * (
                N * dxhat - dxhat.sum(axis=0) - lc.xhat * (dxhat * lc.xhat).sum(axis=0))
        else:
            dh_all = dxhat * lc.inv_std
        dh_all = dh_all.reshape(T, B, H)

        W, U = p[f"lstm{layer}.W"], p[f"lstm{layer}.U"]
        dz_all = np.empty((T, B, 4 * H))
        dc = np.zeros((B, H))
        zeros = np.zeros((B, H))
        dh = np.ascontiguousarray(dh_all[T - 1])
        for t in range(T - 1, -1, -1):
            c_prev = lc.cells[t - 1] if t > 0 else zeros
            lstm_gates_backward(lc.acts[t], c_prev, lc.tanh_cells[t], dh, dc, dz_all[t], dc)
            if t > 0:
                np.matmul(dz_all[t], U, out=dh)
                dh += dh_all[t - 1]

        F = lc.inputs.shape[2]
        dz_flat = dz_all.reshape(T * B, 4 * H)
        grads[f"lstm{layer}.W"] = dz_flat.T @ lc.inputs.reshape(T * B, F) + (2.0 * cfg.l2) * W
        if T > 1:
            grads[f"lstm{layer}.U"] = (
                dz_all[1:].reshape((T - 1) * B, 4 * H).T @ lc.hidden[:-1].reshape((T - 1) * B, H)
                + (2.0 * cfg.l2) * U)
        else:
            grads[f"lstm{layer}.U"] = (2.0 * cfg.l2) * U
        grads[f"lstm{layer}.b"] = dz_flat.sum(axis=0)
        if layer > 0:
            d_seq = dz_flat @ W
    cache.consumed = True
    return grads


def loss_and_grads(model: LstmModel, batch, targets, *, rng=None, masks=None):
    """Train-mode forward + backward on one batch.

    Returns ``(mse, grads, cache)``; the total objective is ``mse + l2_penalty``.
    """
    pred, cache = forward(model, batch, training=True, rng=rng, masks=masks)
    mse = mse_loss(pred, targets)
    grads = backward(model, cache, mse_grad(pred, targets))
    return mse, grads, cache


def predict(model: LstmModel, samples, chunk: int = 256) -> np.ndarray:
    """Eval-mode predictions, evaluated in fixed-size chunks."""
    x = np.asarray(samples, dtype=np.float64)
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], chunk):
        out[start:start + chunk], _ = forward(model, x[start:start + chunk], training=False)
    return out
