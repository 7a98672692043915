"""Central finite-difference verification of :func:`model.backward`."""

from __future__ import annotations

import numpy as np

from .model import LstmModel, dropout_masks, forward, l2_penalty, loss_and_grads, mse_loss


def relative_error(analytic, numeric, floor: float = 1e-6) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor), elementwise.

    The floor keeps finite-difference rounding noise on near-zero gradients
    from dominating the ratio.
    """
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def numeric_gradients(model: LstmModel, batch, targets, masks, step: float = 1e-5,
                      names=None) -> dict[str, np.ndarray]:
    def objective():
        pred, _ = forward(model, batch, training=True, masks=masks)
        return mse_loss(pred, targets) + l2_penalty(model)

    out = {}
    for name in names or model.params:
        p = model.params[name]
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            up = objective()
            flat[k] = orig - step
            down = objective()
            flat[k] = orig
            gflat[k] = (up - down) / (2.0 * step)
        out[name] = g
    return out


def gradient_check(model: LstmModel, batch, targets, step: float = 1e-5, seed: int = 0,
                   floor: float = 1e-6, corrupt=None, return_details: bool = False):
    """Worst relative error between analytic and central-difference gradients.

    Dropout masks are drawn once from ``seed`` and reused for every
    evaluation, so the objective is a deterministic function of the
    parameters.  ``corrupt`` optionally maps the analytic gradient dict before
    comparison (used to check the harness itself).
    """
    batch = np.asarray(batch, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    B, T, _ = batch.shape
    masks = None
    if model.config.dropout > 0:
        masks = dropout_masks(model, B, T, np.random.default_rng(seed))
    _, analytic, _ = loss_and_grads(model, batch, targets, masks=masks)
    if corrupt is not None:
        analytic = corrupt(analytic)
    numeric = numeric_gradients(model, batch, targets, masks, step)
    per_param = {name: float(relative_error(analytic[name], numeric[name], floor).max())
                 for name in model.params}
    worst = max(per_param.values())
    if return_details:
        return worst, per_param
    return worst
