"""Pure numpy/Python implementations of the hot kernels.

These are the reference versions; ``_clstm.pyx`` and ``_cthermal.pyx`` mirror them operation
for operation so both backends agree to rounding.
"""

import math

import numpy as np

NAME = "python"


def _sigmoid(x):
    # clamp keeps exp finite; the value is exact to rounding below -700 anyway
    return 1.0 / (1.0 + np.exp(-np.maximum(x, -700.0)))


def _out(arr, shape):
    if arr is None:
        return np.empty(shape)
    if arr.shape != shape:
        raise ValueError(f"output buffer has shape {arr.shape}, expected {shape}")
    return arr


def lstm_gates_forward(z, c_prev, act=None, c=None, tanh_c=None, h=None):
    """Apply gate nonlinearities and the cell update for one time step.

    ``z`` holds the pre-activations (B, 4H) in gate order i, f, g, o.
    Returns ``(act, c, tanh_c, h)`` where ``act`` are the activated gates.
    Preallocated output arrays may be passed in.
    """
    B, H = c_prev.shape
    if z.shape != (B, 4 * H):
        raise ValueError("shape mismatch between gate pre-activations and cell state")
    act = _out(act, (B, 4 * H))
    c = _out(c, (B, H))
    tanh_c = _out(tanh_c, (B, H))
    h = _out(h, (B, H))
    act[:, :2 * H] = _sigmoid(z[:, :2 * H])
    act[:, 2 * H:3 * H] = np.tanh(z[:, 2 * H:3 * H])
    act[:, 3 * H:] = _sigmoid(z[:, 3 * H:])
    i = act[:, :H]
    f = act[:, H:2 * H]
    g = act[:, 2 * H:3 * H]
    o = act[:, 3 * H:]
    np.multiply(f, c_prev, out=c)
    c += i * g
    np.tanh(c, out=tanh_c)
    np.multiply(o, tanh_c, out=h)
    return act, c, tanh_c, h


def lstm_gates_backward(act, c_prev, tanh_c, dh, dc, dz=None, dc_prev=None):
    """Backward pass of :func:`lstm_gates_forward`.

    ``dh`` and ``dc`` are the incoming gradients w.r.t. ``h`` and ``c``.
    Returns ``(dz, dc_prev)``.
    """
    B, H = c_prev.shape
    if act.shape != (B, 4 * H) or dh.shape != (B, H) or dc.shape != (B, H):
        raise ValueError("shape mismatch between gates and cell state")
    dz = _out(dz, (B, 4 * H))
    dc_prev = _out(dc_prev, (B, H))
    i = act[:, :H]
    f = act[:, H:2 * H]
    g = act[:, 2 * H:3 * H]
    o = act[:, 3 * H:]
    dct = dc + dh * o * (1.0 - tanh_c * tanh_c)
    dz[:, :H] = dct * g * i * (1.0 - i)
    dz[:, H:2 * H] = dct * c_prev * f * (1.0 - f)
    dz[:, 2 * H:3 * H] = dct * i * (1.0 - g * g)
    dz[:, 3 * H:] = dh * tanh_c * o * (1.0 - o)
    np.multiply(dct, f, out=dc_prev)
    return dz, dc_prev


# --- PV heat balance -------------------------------------------------------

def heat_balance_residual(t_cell, irr, t_amb, wind, p):
    """Scalar residual q_s + q_c + q_r - P_pv; ``p`` is a packed parameter tuple.

    Order of ``p``: (p_ref, irr_ref, t_ref, gamma, area, alpha, eps_cell,
    eps_amb, length, k0, rho0, beta0, cp0, mu0, g, sigma, v_threshold).
    """
    (p_ref, irr_ref, t_ref, gamma, area, alpha, eps_cell, eps_amb, length,
     k0, rho0, beta0, cp0, mu0, grav, sigma, v_thr) = p
    q_s = alpha * irr * area
    q_r = area * sigma * (eps_amb * t_amb ** 4 - eps_cell * t_cell ** 4)
    dt = t_cell - t_amb
    h_free = (0.1 * k0 / length) * (grav * rho0 * beta0 * cp0 / (mu0 * k0)) ** (1.0 / 3.0)
    h_free *= max(dt, 0.0) ** (1.0 / 3.0)
    re = rho0 * wind * length / mu0
    pr = mu0 * cp0 / k0
    if wind < v_thr:
        h_forced = 0.664 * (k0 / length) * math.sqrt(re) * pr ** (1.0 / 3.0)
    else:
        h_forced = 0.037 * (k0 / length) * re ** 0.8 * pr ** (1.0 / 3.0)
    q_c = -(h_free + h_forced) * area * dt
    p_pv = (irr / irr_ref) * p_ref * (1.0 - gamma * (t_cell - t_ref))
    return q_s + q_c + q_r - p_pv


def solve_cell_temperature(irr, t_amb, wind, p, max_doublings=5, max_iter=200):
    """Bracketed bisection on the heat-balance residual.

    Returns ``(t_cell, status)``; status 0 on success, 1 if no sign change
    could be bracketed, 2 if the iteration budget ran out.
    """
    alpha, area = p[5], p[4]
    tol = 1e-8 * max(1.0, alpha * irr * area)  # margin inside the 1e-6 contract
    below, above = 20.0, 120.0
    for _ in range(max_doublings + 1):
        lo = max(t_amb - below, 1e-3)
        hi = t_amb + above
        f_lo = heat_balance_residual(lo, irr, t_amb, wind, p)
        f_hi = heat_balance_residual(hi, irr, t_amb, wind, p)
        if f_lo >= 0.0 >= f_hi:
            break
        if f_lo < 0.0:
            below *= 2.0
        if f_hi > 0.0:
            above *= 2.0
    else:
        return math.nan, 1
    if f_lo == 0.0:
        return lo, 0
    if f_hi == 0.0:
        return hi, 0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = heat_balance_residual(mid, irr, t_amb, wind, p)
        if abs(f_mid) <= tol or hi - lo <= 1e-12 * mid:
            return mid, 0
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), 2


def solve_cell_temperature_many(irr, t_amb, wind, p):
    n = irr.shape[0]
    out = np.empty(n)
    status = np.zeros(n, dtype=np.int32)
    for k in range(n):
        out[k], status[k] = solve_cell_temperature(
            float(irr[k]), float(t_amb[k]), float(wind[k]), p)
    return out, status
