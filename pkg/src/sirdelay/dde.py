"""Fixed-step constant-lag DDE integration by the method of steps.

Classical RK4 runs over a mesh that contains every derivative breakpoint
(sums of lags up to a configurable depth) and otherwise uniform steps no
larger than ``h``.  Delayed states come from the cubic Hermite interpolant of
the part of the solution already computed, or from the history function for
times before ``t0``.

Lags below ``NEGLIGIBLE_LAG`` are treated as zero: the delayed value is the
current stage value.  The induced error is at most ``lag * sup|u'|`` and it
avoids a step-size collapse for lags far below the step.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalBlowup, RangeError

NEGLIGIBLE_LAG = 1e-7
MAX_DEPTH = 5

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 0.1
    depth: int = 3
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ConfigurationError(f"step h must be positive, got {self.h}")
        if not (0 <= int(self.depth) <= MAX_DEPTH) or int(self.depth) != self.depth:
            raise ConfigurationError(f"breakpoint depth must be an integer in [0, {MAX_DEPTH}]")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ConfigurationError("max_steps must be a positive integer")


class History:
    """State before ``t0``: either a constant vector or a tabulated curve.

    Tabulated histories are linearly interpolated and held constant outside
    the table.
    """

    def __init__(self, mode: str, values, times=None):
        if mode not in ("constant", "tabulated"):
            raise DomainError(f"unknown history mode {mode!r}")
        values = np.array(values, dtype=float)
        if mode == "constant":
            values = np.atleast_1d(values)
            if values.ndim != 1:
                raise DomainError("constant history needs a state vector")
            times = None
        else:
            times = np.array(times, dtype=float)
            values = np.atleast_2d(values)
            if times.ndim != 1 or len(times) < 2 or values.shape[0] != len(times):
                raise DomainError("tabulated history needs >= 2 (time, state) rows")
            if np.any(np.diff(times) <= 0):
                raise DomainError("tabulated history times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("history values must be finite")
        self.mode = mode
        self.values = values
        self.times = times
        self.values.setflags(write=False)
        if self.times is not None:
            self.times.setflags(write=False)

    @classmethod
    def constant(cls, value) -> "History":
        return cls("constant", value)

    @classmethod
    def tabulated(cls, times, values) -> "History":
        return cls("tabulated", values, times)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    def covers(self, t_start: float) -> bool:
        return self.mode == "constant" or self.times[0] <= t_start + 1e-12

    def __call__(self, t: float) -> np.ndarray:
        if self.mode == "constant":
            return self.values.copy()
        return np.array([np.interp(t, self.times, self.values[:, i]) for i in range(self.dim)])

    def integral(self, a: float, b: float) -> np.ndarray:
        """Integral over [a, b] (trapezoid on the table for tabulated mode)."""
        if b <= a:
            return np.zeros(self.dim)
        if self.mode == "constant":
            return (b - a) * self.values
        inner = self.times[(self.times > a) & (self.times < b)]
        grid = np.concatenate(([a], inner, [b]))
        vals = np.array([self(t) for t in grid])
        return _trapezoid(vals, grid, axis=0)

    def __eq__(self, other):
        if not isinstance(other, History):
            return NotImplemented
        if self.mode != other.mode:
            return False
        if self.mode == "tabulated" and not np.array_equal(self.times, other.times):
            return False
        return np.array_equal(self.values, other.values)

    def __repr__(self):
        if self.mode == "constant":
            return f"History.constant({self.values.tolist()})"
        return f"History.tabulated({len(self.times)} rows)"


def _hermite_basis(s):
    s2 = s * s
    s3 = s2 * s
    return (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2)


class Trajectory:
    """Dense-output solution: nodes, node states and node derivatives.

    Between nodes the solution is the cubic Hermite interpolant of the
    states and derivatives at the interval ends.  Queries before ``t0`` are
    answered by the history.
    """

    def __init__(self, t, u, f, history: History | None = None):
        self.t = np.asarray(t, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.f = np.asarray(f, dtype=float)
        if self.u.ndim == 1:
            self.u = self.u[:, None]
            self.f = self.f[:, None]
        if len(self.t) < 1 or self.u.shape != self.f.shape or self.u.shape[0] != len(self.t):
            raise DomainError("inconsistent trajectory arrays")
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory nodes must be strictly increasing")
        self.history = history
        for arr in (self.t, self.u, self.f):
            arr.setflags(write=False)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def span(self) -> tuple[float, float]:
        return (self.t0, self.t_end)

    def sample(self, t):
        """State at time(s) ``t``; exact at nodes."""
        scalar = np.ndim(t) == 0
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(tq > self.t_end) or not np.all(np.isfinite(tq)):
            raise RangeError(f"query beyond computed end {self.t_end}")
        out = np.empty((len(tq), self.u.shape[1]))
        before = tq < self.t0
        if np.any(before):
            if self.history is None:
                raise RangeError("query before t0 and no history attached")
            out[before] = np.array([self.history(s) for s in tq[before]])
        inside = ~before
        if np.any(inside):
            ti = tq[inside]
            k = np.clip(np.searchsorted(self.t, ti, side="right") - 1, 0, max(len(self.t) - 2, 0))
            if len(self.t) == 1:
                out[inside] = self.u[0]
            else:
                h = self.t[k + 1] - self.t[k]
                s = (ti - self.t[k]) / h
                h00, h10, h01, h11 = _hermite_basis(s)
                out[inside] = (h00[:, None] * self.u[k] + (h10 * h)[:, None] * self.f[k]
                               + h01[:, None] * self.u[k + 1] + (h11 * h)[:, None] * self.f[k + 1])
        return out[0] if scalar else out

    def coefficients(self) -> np.ndarray:
        """Per-interval power-basis coefficients in the local variable
        ``s = (t - t_k)/h_k``, shape (n_intervals, 4, dim), constant term first."""
        h = np.diff(self.t)[:, None]
        u0, u1, f0, f1 = self.u[:-1], self.u[1:], self.f[:-1] * h, self.f[1:] * h
        return np.stack([u0, f0, 3 * (u1 - u0) - 2 * f0 - f1, 2 * (u0 - u1) + f0 + f1], axis=1)

    def _cumulative(self):
        if not hasattr(self, "_cum"):
            h = np.diff(self.t)[:, None]
            pieces = 0.5 * h * (self.u[:-1] + self.u[1:]) + h * h / 12.0 * (self.f[:-1] - self.f[1:])
            self._cum = np.vstack([np.zeros((1, self.u.shape[1])), np.cumsum(pieces, axis=0)])
        return self._cum

    def _primitive(self, t):
        """Exact integral of the interpolant from t0 to t (vectorised, t in span)."""
        cum = self._cumulative()
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self.t) == 1:
            return np.repeat(cum[:1], len(t), axis=0)
        k = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2)
        h = (self.t[k + 1] - self.t[k])
        s = (t - self.t[k]) / h
        # antiderivatives of the Hermite basis
        a00 = s ** 4 / 2 - s ** 3 + s
        a10 = s ** 4 / 4 - 2 * s ** 3 / 3 + s ** 2 / 2
        a01 = -s ** 4 / 2 + s ** 3
        a11 = s ** 4 / 4 - s ** 3 / 3
        h = h[:, None]
        return cum[k] + h * (a00[:, None] * self.u[k] + a10[:, None] * h * self.f[k]
                             + a01[:, None] * self.u[k + 1] + a11[:, None] * h * self.f[k + 1])

    def integral(self, a, b):
        """Integral of the state over [a, b] (a <= b); the part before t0 uses
        the history.  Accepts scalars or equal-length arrays."""
        scalar = np.ndim(a) == 0 and np.ndim(b) == 0
        a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(a, dtype=float)),
                                   np.atleast_1d(np.asarray(b, dtype=float)))
        if np.any(b < a):
            raise DomainError("integral needs a <= b")
        if np.any(b > self.t_end + 1e-12):
            raise RangeError(f"integral beyond computed end {self.t_end}")
        dim = self.u.shape[1]
        total = np.zeros((len(a), dim))
        pre = a < self.t0
        if np.any(pre):
            if self.history is None:
                raise RangeError("integral before t0 and no history attached")
            if self.history.mode == "constant":
                total[pre] += (np.minimum(b[pre], self.t0) - a[pre])[:, None] * self.history.values
            else:
                total[pre] += np.array([self.history.integral(lo, min(hi, self.t0))
                                        for lo, hi in zip(a[pre], b[pre])])
        lo = np.maximum(a, self.t0)
        hi = np.minimum(np.maximum(b, lo), self.t_end)
        total += self._primitive(hi) - self._primitive(lo)
        return total[0] if scalar else total


def breakpoints(lags: Sequence[float], t_end: float, depth: int, t0: float = 0.0) -> list[float]:
    """All ``t0 + sum(n_i * lag_i)`` up to ``t_end`` with ``sum(n_i) <= depth``."""
    positive = sorted({float(l) for l in lags if l >= NEGLIGIBLE_LAG})
    points = {0.0}
    for order in range(1, depth + 1):
        for combo in itertools.combinations_with_replacement(positive, order):
            s = math.fsum(combo)
            if t0 + s <= t_end + 1e-12:
                points.add(s)
    out = []
    for s in sorted(points):
        t = t0 + s
        if not out or t - out[-1] > 1e-12:
            out.append(min(t, t_end) if t > t_end else t)
    return out


def effective_step(lags: Sequence[float], span: tuple[float, float], h: float) -> float:
    """min(h, span/100, smallest resolved lag / 10)."""
    t0, t_end = span
    candidates = [h, (t_end - t0) / 100.0]
    resolved = [l for l in lags if l >= NEGLIGIBLE_LAG]
    if resolved:
        candidates.append(min(resolved) / 10.0)
    return min(candidates)


def build_mesh(lags: Sequence[float], span: tuple[float, float], cfg: IntegratorConfig) -> np.ndarray:
    """Breakpoints plus uniform subdivision of each gap into steps <= h_eff."""
    t0, t_end = span
    if not (math.isfinite(t0) and math.isfinite(t_end) and t_end > t0):
        raise ConfigurationError(f"empty or invalid span {span!r}")
    h = effective_step(lags, span, cfg.h)
    bps = breakpoints(lags, t_end, cfg.depth, t0)
    if bps[-1] < t_end - 1e-12:
        bps.append(t_end)
    else:
        bps[-1] = t_end
    counts = [max(1, math.ceil((b - a) / h - 1e-9)) for a, b in zip(bps[:-1], bps[1:])]
    total = sum(counts)
    if total > cfg.max_steps:
        raise ConfigurationError(
            f"{total} steps needed at h={h:.3g} exceeds max_steps={cfg.max_steps}")
    pieces = [np.linspace(a, b, n + 1)[:-1] for a, b, n in zip(bps[:-1], bps[1:], counts)]
    mesh = np.concatenate(pieces + [np.array([t_end])])
    if np.any(np.diff(mesh) <= 0):
        raise ConfigurationError("step underflow while building mesh")
    return mesh


class _Dense:
    """Growing dense output used while integrating."""

    def __init__(self, mesh, dim, history: History):
        n = len(mesh)
        self.t = mesh
        self.tl = mesh.tolist()
        self.u = np.empty((n, dim))
        self.f = np.empty((n, dim))
        self.history = history
        self.t0 = self.tl[0]
        self.n = 0  # index of the last node whose state and derivative are known

    def lookup(self, tq):
        if tq < self.t0:
            return self.history(tq)
        n = self.n
        if tq > self.tl[n] + 1e-12 * max(1.0, abs(tq)):
            raise RangeError(f"delayed query at {tq} ahead of computed solution {self.tl[n]}")
        if n == 0:
            return self.u[0].copy()
        k = bisect.bisect_right(self.tl, tq, 0, n + 1) - 1
        if k >= n:
            k = n - 1
        t_k = self.tl[k]
        h = self.tl[k + 1] - t_k
        s = (tq - t_k) / h
        h00, h10, h01, h11 = _hermite_basis(s)
        return h00 * self.u[k] + (h10 * h) * self.f[k] + h01 * self.u[k + 1] + (h11 * h) * self.f[k + 1]


def integrate(rhs: Callable, lags: Sequence[float], history: History | None, init,
              span: tuple[float, float], cfg: IntegratorConfig | None = None,
              mesh: np.ndarray | None = None) -> Trajectory:
    """Integrate ``u'(t) = rhs(t, u(t), [u(t - lag) for lag in lags])``.

    ``history`` defaults to the constant initial state.  A precomputed
    ``mesh`` may be passed (it must start at t0 and end at t_end); otherwise
    one is built from the lags and ``cfg``.
    """
    cfg = cfg or IntegratorConfig()
    lags = [float(l) for l in lags]
    if any(not math.isfinite(l) or l < 0 for l in lags):
        raise DomainError("lags must be finite and nonnegative")
    init = np.array(init, dtype=float)
    if history is None:
        history = History.constant(init)
    if history.dim != init.shape[0]:
        raise DomainError("history dimension differs from initial state")
    if mesh is None:
        mesh = build_mesh(lags, span, cfg)
    else:
        mesh = np.asarray(mesh, dtype=float)
    zero = [l < NEGLIGIBLE_LAG for l in lags]
    dense = _Dense(mesh, init.shape[0], history)

    def field(t, u):
        delayed = [u if z else dense.lookup(t - l) for z, l in zip(zero, lags)]
        return np.asarray(rhs(t, u, delayed), dtype=float)

    dense.u[0] = init
    dense.f[0] = field(mesh[0], init)
    _check(dense.f[0], mesh[0])
    tl = dense.tl
    for n in range(len(mesh) - 1):
        t, h = tl[n], tl[n + 1] - tl[n]
        hh = 0.5 * h
        u = dense.u[n]
        k1 = dense.f[n]
        k2 = field(t + hh, u + hh * k1)
        k3 = field(t + hh, u + hh * k2)
        k4 = field(tl[n + 1], u + h * k3)
        u_new = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(u_new, tl[n + 1])
        dense.u[n + 1] = u_new
        dense.n = n + 1
        dense.f[n + 1] = field(tl[n + 1], u_new)
        _check(dense.f[n + 1], tl[n + 1])
    return Trajectory(mesh, dense.u, dense.f, history)


def _check(vec, t):
    if not np.all(np.isfinite(vec)):
        raise NumericalBlowup(t)


def rk4_ode(fun: Callable, init, mesh) -> Trajectory:
    """Plain RK4 for ``u' = fun(t, u)`` on a given mesh (no delays)."""
    mesh = np.asarray(mesh, dtype=float)
    tl = mesh.tolist()
    u = np.empty((len(mesh), len(init)))
    f = np.empty_like(u)
    u[0] = np.array(init, dtype=float)
    f[0] = fun(tl[0], u[0])
    for n in range(len(mesh) - 1):
        t, h = tl[n], tl[n + 1] - tl[n]
        hh = 0.5 * h
        k1 = f[n]
        k2 = np.asarray(fun(t + hh, u[n] + hh * k1), dtype=float)
        k3 = np.asarray(fun(t + hh, u[n] + hh * k2), dtype=float)
        k4 = np.asarray(fun(tl[n + 1], u[n] + h * k3), dtype=float)
        u[n + 1] = u[n] + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(u[n + 1], tl[n + 1])
        f[n + 1] = fun(tl[n + 1], u[n + 1])
    return Trajectory(mesh, u, f, History.constant(u[0]))
