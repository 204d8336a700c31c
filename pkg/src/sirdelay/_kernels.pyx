# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled SIR kernel.  Keep in step with ``_pykernels.py``."""

import numpy as np
from libc.math cimport sinh, tanh, pow, isfinite

BACKEND = "cython"


cdef inline double _incidence(int kind, double c0, double c1, double c2,
                              double x, double y) noexcept nogil:
    if kind == 0:
        return x * y
    if kind == 1:
        return c0 * pow(x, c1) * pow(y, c2)
    if kind == 2:
        return x * y / (1.0 + c0 * x)
    return x * y / (1.0 + c0 * y)


cdef inline double _rate(int kind, double k, double a, double u) noexcept nogil:
    if kind == 1:
        return u
    if kind == 2:
        return u / (a + u)
    if kind == 3:
        return sinh(u)
    if kind == 4:
        return tanh(u)
    return k


cdef struct Ctx:
    double a, b, c, d, b1, r, d1, alpha
    int f_kind, v_kind, p_kind
    double fc0, fc1, fc2, vk, va, pk, pa
    double eta, tau, delta
    bint z_eta, z_tau, z_delta
    double t0
    Py_ssize_t n
    Py_ssize_t m


cdef inline double _hist(const double[::1] ht, const double[:, ::1] hu, int col,
                         Py_ssize_t m, double tq) noexcept nogil:
    cdef Py_ssize_t lo, hi, mid
    cdef double w
    if m == 1 or tq <= ht[0]:
        return hu[0, col]
    if tq >= ht[m - 1]:
        return hu[m - 1, col]
    lo = 0
    hi = m
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if ht[mid] <= tq:
            lo = mid
        else:
            hi = mid
    w = (tq - ht[lo]) / (ht[lo + 1] - ht[lo])
    return hu[lo, col] + w * (hu[lo + 1, col] - hu[lo, col])


cdef inline double _lookup(Ctx* ctx, const double[::1] T, double[:, ::1] U, double[:, ::1] F,
                           const double[::1] ht, const double[:, ::1] hu, int col,
                           double tq) noexcept nogil:
    cdef Py_ssize_t n = ctx.n, k, lo, hi, mid
    cdef double h, s, s2, s3, h00, h10, h01, h11
    if tq < ctx.t0:
        return _hist(ht, hu, col, ctx.m, tq)
    if n == 0:
        return U[0, col]
    # bisect_right over T[0:n+1]
    lo = 0
    hi = n + 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if tq < T[mid]:
            hi = mid
        else:
            lo = mid + 1
    k = lo - 1
    if k >= n:
        k = n - 1
    h = T[k + 1] - T[k]
    s = (tq - T[k]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    return h00 * U[k, col] + h10 * h * F[k, col] + h01 * U[k + 1, col] + h11 * h * F[k + 1, col]


cdef inline void _field(Ctx* ctx, const double[::1] T, double[:, ::1] U, double[:, ::1] F,
                        const double[::1] ht, const double[:, ::1] hu,
                        double t, double x, double y, double z, double* out) noexcept nogil:
    cdef double xe, xt, yd
    xe = x if ctx.z_eta else _lookup(ctx, T, U, F, ht, hu, 0, t - ctx.eta)
    xt = x if ctx.z_tau else _lookup(ctx, T, U, F, ht, hu, 0, t - ctx.tau)
    yd = y if ctx.z_delta else _lookup(ctx, T, U, F, ht, hu, 1, t - ctx.delta)
    out[0] = ctx.a - ctx.b * _incidence(ctx.f_kind, ctx.fc0, ctx.fc1, ctx.fc2, x, y) - ctx.d * x \
        - ctx.c * _rate(ctx.v_kind, ctx.vk, ctx.va, xe) + ctx.alpha * z
    out[1] = ctx.b1 * _incidence(ctx.f_kind, ctx.fc0, ctx.fc1, ctx.fc2, xt, y) \
        - ctx.r * _rate(ctx.p_kind, ctx.pk, ctx.pa, y) - ctx.d1 * y
    out[2] = ctx.r * _rate(ctx.p_kind, ctx.pk, ctx.pa, yd) - ctx.alpha * z


def integrate_sir(mesh, params, int f_kind, f_coef, int v_kind, v_coef, int p_kind, p_coef,
                  lags, hist_t, hist_u, init, double negligible_lag):
    """Integrate the delayed SIR system over ``mesh``.

    Returns ``(U, F, fail)`` with node states, node derivatives and the index
    of the first non-finite node (``-1`` on success).
    """
    cdef const double[::1] T = np.ascontiguousarray(mesh, dtype=np.float64)
    cdef const double[::1] ht = np.ascontiguousarray(hist_t, dtype=np.float64)
    cdef const double[:, ::1] hu = np.ascontiguousarray(hist_u, dtype=np.float64)
    cdef Py_ssize_t N = T.shape[0]
    U_arr = np.zeros((N, 3), dtype=np.float64)
    F_arr = np.zeros((N, 3), dtype=np.float64)
    cdef double[:, ::1] U = U_arr
    cdef double[:, ::1] F = F_arr
    cdef Ctx ctx
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double t, h, hh, w, xn, yn, zn
    cdef Py_ssize_t n
    cdef Py_ssize_t fail = -1

    ctx.a, ctx.b, ctx.c, ctx.d, ctx.b1, ctx.r, ctx.d1, ctx.alpha = [float(p) for p in params]
    ctx.f_kind, ctx.v_kind, ctx.p_kind = f_kind, v_kind, p_kind
    ctx.fc0, ctx.fc1, ctx.fc2 = [float(v) for v in f_coef]
    ctx.vk, ctx.va = [float(v) for v in v_coef]
    ctx.pk, ctx.pa = [float(v) for v in p_coef]
    ctx.eta, ctx.tau, ctx.delta = [float(v) for v in lags]
    ctx.z_eta = ctx.eta < negligible_lag
    ctx.z_tau = ctx.tau < negligible_lag
    ctx.z_delta = ctx.delta < negligible_lag
    ctx.t0 = T[0]
    ctx.n = 0
    ctx.m = ht.shape[0]

    U[0, 0], U[0, 1], U[0, 2] = [float(v) for v in init]
    with nogil:
        _field(&ctx, T, U, F, ht, hu, T[0], U[0, 0], U[0, 1], U[0, 2], k1)
        F[0, 0] = k1[0]
        F[0, 1] = k1[1]
        F[0, 2] = k1[2]
        if not (isfinite(k1[0]) and isfinite(k1[1]) and isfinite(k1[2])):
            fail = 0
        n = 0
        while fail < 0 and n < N - 1:
            t = T[n]
            h = T[n + 1] - t
            hh = 0.5 * h
            k1[0] = F[n, 0]
            k1[1] = F[n, 1]
            k1[2] = F[n, 2]
            _field(&ctx, T, U, F, ht, hu, t + hh, U[n, 0] + hh * k1[0],
                   U[n, 1] + hh * k1[1], U[n, 2] + hh * k1[2], k2)
            _field(&ctx, T, U, F, ht, hu, t + hh, U[n, 0] + hh * k2[0],
                   U[n, 1] + hh * k2[1], U[n, 2] + hh * k2[2], k3)
            _field(&ctx, T, U, F, ht, hu, T[n + 1], U[n, 0] + h * k3[0],
                   U[n, 1] + h * k3[1], U[n, 2] + h * k3[2], k4)
            w = h / 6.0
            xn = U[n, 0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            yn = U[n, 1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            zn = U[n, 2] + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            U[n + 1, 0] = xn
            U[n + 1, 1] = yn
            U[n + 1, 2] = zn
            ctx.n = n + 1
            if not (isfinite(xn) and isfinite(yn) and isfinite(zn)):
                fail = n + 1
                break
            _field(&ctx, T, U, F, ht, hu, T[n + 1], xn, yn, zn, k1)
            F[n + 1, 0] = k1[0]
            F[n + 1, 1] = k1[1]
            F[n + 1, 2] = k1[2]
            if not (isfinite(k1[0]) and isfinite(k1[1]) and isfinite(k1[2])):
                fail = n + 1
            n += 1
    return U_arr, F_arr, int(fail)
