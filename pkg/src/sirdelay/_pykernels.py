"""Pure-Python SIR kernel, used when the compiled extension is unavailable.

Operation order mirrors ``_kernels.pyx`` line for line so both backends
produce the same floating-point results.
"""

import math
from bisect import bisect_right

import numpy as np

BACKEND = "python"


def _incidence(kind, c0, c1, c2, x, y):
    if kind == 0:
        return x * y
    if kind == 1:
        return c0 * math.pow(x, c1) * math.pow(y, c2)
    if kind == 2:
        return x * y / (1.0 + c0 * x)
    return x * y / (1.0 + c0 * y)


def _rate(kind, k, a, u):
    if kind == 1:
        return u
    if kind == 2:
        return u / (a + u)
    if kind == 3:
        return math.sinh(u)
    if kind == 4:
        return math.tanh(u)
    return k


def integrate_sir(mesh, params, f_kind, f_coef, v_kind, v_coef, p_kind, p_coef,
                  lags, hist_t, hist_u, init, negligible_lag):
    """Integrate the delayed SIR system over ``mesh``.

    Returns ``(U, F, fail)`` with node states, node derivatives and the index
    of the first non-finite node (``-1`` on success).
    """
    T = [float(t) for t in mesh]
    N = len(T)
    a, b, c, d, b1, r, d1, alpha = (float(p) for p in params)
    fc0, fc1, fc2 = (float(v) for v in f_coef)
    vk_, va_ = (float(v) for v in v_coef)
    pk_, pa_ = (float(v) for v in p_coef)
    eta, tau, delta = (float(l) for l in lags)
    z_eta = eta < negligible_lag
    z_tau = tau < negligible_lag
    z_delta = delta < negligible_lag
    HT = [float(t) for t in hist_t]
    HX = [float(v) for v in hist_u[:, 0]]
    HY = [float(v) for v in hist_u[:, 1]]
    m = len(HT)
    t0 = T[0]

    X = [0.0] * N
    Y = [0.0] * N
    Z = [0.0] * N
    FX = [0.0] * N
    FY = [0.0] * N
    FZ = [0.0] * N
    state = {"n": 0}

    def hist(col, tq):
        if m == 1 or tq <= HT[0]:
            return col[0]
        if tq >= HT[m - 1]:
            return col[m - 1]
        j = bisect_right(HT, tq) - 1
        w = (tq - HT[j]) / (HT[j + 1] - HT[j])
        return col[j] + w * (col[j + 1] - col[j])

    def lookup(comp, fcomp, hcol, tq):
        if tq < t0:
            return hist(hcol, tq)
        n = state["n"]
        if n == 0:
            return comp[0]
        k = bisect_right(T, tq, 0, n + 1) - 1
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
        return h00 * comp[k] + h10 * h * fcomp[k] + h01 * comp[k + 1] + h11 * h * fcomp[k + 1]

    def field(t, x, y, z):
        xe = x if z_eta else lookup(X, FX, HX, t - eta)
        xt = x if z_tau else lookup(X, FX, HX, t - tau)
        yd = y if z_delta else lookup(Y, FY, HY, t - delta)
        dx = a - b * _incidence(f_kind, fc0, fc1, fc2, x, y) - d * x \
            - c * _rate(v_kind, vk_, va_, xe) + alpha * z
        dy = b1 * _incidence(f_kind, fc0, fc1, fc2, xt, y) - r * _rate(p_kind, pk_, pa_, y) - d1 * y
        dz = r * _rate(p_kind, pk_, pa_, yd) - alpha * z
        return dx, dy, dz

    def finite(*vals):
        return all(math.isfinite(v) for v in vals)

    fail = -1
    X[0], Y[0], Z[0] = (float(v) for v in init)
    try:
        FX[0], FY[0], FZ[0] = field(t0, X[0], Y[0], Z[0])
        if not finite(FX[0], FY[0], FZ[0]):
            fail = 0
        for n in range(N - 1):
            if fail >= 0:
                break
            t = T[n]
            h = T[n + 1] - t
            hh = 0.5 * h
            x, y, z = X[n], Y[n], Z[n]
            k1x, k1y, k1z = FX[n], FY[n], FZ[n]
            k2x, k2y, k2z = field(t + hh, x + hh * k1x, y + hh * k1y, z + hh * k1z)
            k3x, k3y, k3z = field(t + hh, x + hh * k2x, y + hh * k2y, z + hh * k2z)
            k4x, k4y, k4z = field(T[n + 1], x + h * k3x, y + h * k3y, z + h * k3z)
            w = h / 6.0
            xn = x + w * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            yn = y + w * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            zn = z + w * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
            X[n + 1], Y[n + 1], Z[n + 1] = xn, yn, zn
            state["n"] = n + 1
            if not finite(xn, yn, zn):
                fail = n + 1
                break
            FX[n + 1], FY[n + 1], FZ[n + 1] = field(T[n + 1], xn, yn, zn)
            if not finite(FX[n + 1], FY[n + 1], FZ[n + 1]):
                fail = n + 1
    except (OverflowError, ZeroDivisionError, ValueError):
        if fail < 0:
            fail = min(state["n"] + 1, N - 1)
    U = np.column_stack([X, Y, Z])
    F = np.column_stack([FX, FY, FZ])
    return U, F, fail
