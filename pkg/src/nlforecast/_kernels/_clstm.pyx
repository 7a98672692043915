# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM gate kernels (built with vectorized math; see setup.py)."""

import numpy as np
from libc.math cimport exp, tanh, fmax

NAME = "cython"


cdef inline double _sigmoid(double x) noexcept nogil:
    # clamp keeps exp finite; the value is exact to rounding below -700 anyway
    return 1.0 / (1.0 + exp(-fmax(x, -700.0)))


cdef void _gates_row(const double* z, const double* cp, double* act, double* c,
                     double* tc, double* h, Py_ssize_t H) noexcept nogil:
    # split into simple loops so gcc can vectorize exp/tanh
    cdef Py_ssize_t j
    for j in range(2 * H):
        act[j] = _sigmoid(z[j])
    for j in range(2 * H, 3 * H):
        act[j] = tanh(z[j])
    for j in range(3 * H, 4 * H):
        act[j] = _sigmoid(z[j])
    for j in range(H):
        c[j] = act[H + j] * cp[j] + act[j] * act[2 * H + j]
    for j in range(H):
        tc[j] = tanh(c[j])
    for j in range(H):
        h[j] = act[3 * H + j] * tc[j]


cdef void _gates_row_backward(const double* act, const double* cp, const double* tc,
                              const double* dh, const double* dc, double* dz,
                              double* dcp, Py_ssize_t H) noexcept nogil:
    cdef Py_ssize_t j
    cdef double ig, fg, gg, og, t, dct
    for j in range(H):
        ig = act[j]
        fg = act[H + j]
        gg = act[2 * H + j]
        og = act[3 * H + j]
        t = tc[j]
        dct = dc[j] + dh[j] * og * (1.0 - t * t)
        dz[j] = dct * gg * ig * (1.0 - ig)
        dz[H + j] = dct * cp[j] * fg * (1.0 - fg)
        dz[2 * H + j] = dct * ig * (1.0 - gg * gg)
        dz[3 * H + j] = dh[j] * t * og * (1.0 - og)
        dcp[j] = dct * fg


def _out(arr, shape):
    if arr is None:
        return np.empty(shape)
    if arr.shape != shape:
        raise ValueError(f"output buffer has shape {arr.shape}, expected {shape}")
    return arr


def lstm_gates_forward(const double[:, ::1] z, const double[:, ::1] c_prev,
                       act=None, c=None, tanh_c=None, h=None):
    cdef Py_ssize_t B = z.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    if z.shape[1] != 4 * H or c_prev.shape[0] != B:
        raise ValueError("shape mismatch between gate pre-activations and cell state")
    act = _out(act, (B, 4 * H))
    c = _out(c, (B, H))
    tanh_c = _out(tanh_c, (B, H))
    h = _out(h, (B, H))
    cdef double[:, ::1] a_v = act
    cdef double[:, ::1] c_v = c
    cdef double[:, ::1] t_v = tanh_c
    cdef double[:, ::1] h_v = h
    cdef Py_ssize_t b
    if B == 0 or H == 0:
        return act, c, tanh_c, h
    with nogil:
        for b in range(B):
            _gates_row(&z[b, 0], &c_prev[b, 0], &a_v[b, 0], &c_v[b, 0], &t_v[b, 0],
                       &h_v[b, 0], H)
    return act, c, tanh_c, h


def lstm_gates_backward(const double[:, ::1] act, const double[:, ::1] c_prev,
                        const double[:, ::1] tanh_c, const double[:, ::1] dh,
                        const double[:, ::1] dc, dz=None, dc_prev=None):
    cdef Py_ssize_t B = act.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    if (act.shape[1] != 4 * H or c_prev.shape[0] != B or tanh_c.shape[0] != B
            or dh.shape[0] != B or dc.shape[0] != B or tanh_c.shape[1] != H
            or dh.shape[1] != H or dc.shape[1] != H):
        raise ValueError("shape mismatch between gates and cell state")
    dz = _out(dz, (B, 4 * H))
    dc_prev = _out(dc_prev, (B, H))
    cdef double[:, ::1] dz_v = dz
    cdef double[:, ::1] dcp_v = dc_prev
    cdef Py_ssize_t b
    if B == 0 or H == 0:
        return dz, dc_prev
    with nogil:
        for b in range(B):
            _gates_row_backward(&act[b, 0], &c_prev[b, 0], &tanh_c[b, 0], &dh[b, 0],
                                &dc[b, 0], &dz_v[b, 0], &dcp_v[b, 0], H)
    return dz, dc_prev
