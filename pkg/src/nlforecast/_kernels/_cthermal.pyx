# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled PV heat-balance residual and bisection solver."""

import numpy as np
from libc.math cimport sqrt, pow, fabs, NAN

NAME = "cython"


cdef struct PvParams:
    double p_ref, irr_ref, t_ref, gamma, area, alpha, eps_cell, eps_amb, length
    double k0, rho0, beta0, cp0, mu0, grav, sigma, v_thr


cdef inline double _residual(double t_cell, double irr, double t_amb, double wind,
                             PvParams* p) noexcept nogil:
    cdef double q_s = p.alpha * irr * p.area
    cdef double q_r = p.area * p.sigma * (p.eps_amb * pow(t_amb, 4.0) - p.eps_cell * pow(t_cell, 4.0))
    cdef double dt = t_cell - t_amb
    cdef double h_free = (0.1 * p.k0 / p.length) * pow(
        p.grav * p.rho0 * p.beta0 * p.cp0 / (p.mu0 * p.k0), 1.0 / 3.0)
    cdef double re = p.rho0 * wind * p.length / p.mu0
    cdef double pr = p.mu0 * p.cp0 / p.k0
    cdef double h_forced
    h_free = h_free * pow(dt if dt > 0.0 else 0.0, 1.0 / 3.0)
    if wind < p.v_thr:
        h_forced = 0.664 * (p.k0 / p.length) * sqrt(re) * pow(pr, 1.0 / 3.0)
    else:
        h_forced = 0.037 * (p.k0 / p.length) * pow(re, 0.8) * pow(pr, 1.0 / 3.0)
    cdef double q_c = -(h_free + h_forced) * p.area * dt
    cdef double p_pv = (irr / p.irr_ref) * p.p_ref * (1.0 - p.gamma * (t_cell - p.t_ref))
    return q_s + q_c + q_r - p_pv


cdef int _solve(double irr, double t_amb, double wind, PvParams* p,
                double* out) noexcept nogil:
    cdef double tol = p.alpha * irr * p.area
    cdef double below = 20.0, above = 120.0
    cdef double lo = 0.0, hi = 0.0, f_lo = 0.0, f_hi = 0.0, mid, f_mid
    cdef int k
    cdef bint ok = False
    # stop well inside the 1e-6 contract so recomputed residuals keep a margin
    tol = 1e-8 * (tol if tol > 1.0 else 1.0)
    for k in range(6):
        lo = t_amb - below
        if lo < 1e-3:
            lo = 1e-3
        hi = t_amb + above
        f_lo = _residual(lo, irr, t_amb, wind, p)
        f_hi = _residual(hi, irr, t_amb, wind, p)
        if f_lo >= 0.0 and f_hi <= 0.0:
            ok = True
            break
        if f_lo < 0.0:
            below *= 2.0
        if f_hi > 0.0:
            above *= 2.0
    if not ok:
        out[0] = NAN
        return 1
    if f_lo == 0.0:
        out[0] = lo
        return 0
    if f_hi == 0.0:
        out[0] = hi
        return 0
    for k in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _residual(mid, irr, t_amb, wind, p)
        if fabs(f_mid) <= tol or hi - lo <= 1e-12 * mid:
            out[0] = mid
            return 0
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
    out[0] = 0.5 * (lo + hi)
    return 2


def heat_balance_residual(double t_cell, double irr, double t_amb, double wind, p):
    cdef PvParams pp = _pack(p)
    return _residual(t_cell, irr, t_amb, wind, &pp)


def solve_cell_temperature(double irr, double t_amb, double wind, p):
    cdef PvParams pp = _pack(p)
    cdef double out
    cdef int status = _solve(irr, t_amb, wind, &pp, &out)
    return out, status


def solve_cell_temperature_many(const double[::1] irr, const double[::1] t_amb,
                                const double[::1] wind, p):
    cdef Py_ssize_t n = irr.shape[0]
    if t_amb.shape[0] != n or wind.shape[0] != n:
        raise ValueError("input vectors differ in length")
    cdef PvParams pp = _pack(p)
    out_arr = np.empty(n)
    status_arr = np.zeros(n, dtype=np.int32)
    cdef double[::1] out = out_arr
    cdef int[::1] status = status_arr
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            status[k] = _solve(irr[k], t_amb[k], wind[k], &pp, &out[k])
    return out_arr, status_arr


cdef PvParams _pack(p) except *:
    cdef PvParams pp
    (pp.p_ref, pp.irr_ref, pp.t_ref, pp.gamma, pp.area, pp.alpha, pp.eps_cell,
     pp.eps_amb, pp.length, pp.k0, pp.rho0, pp.beta0, pp.cp0, pp.mu0, pp.grav,
     pp.sigma, pp.v_thr) = p
    return pp
