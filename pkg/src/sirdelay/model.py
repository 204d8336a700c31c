"""The delayed SIR system with vaccination and treatment.

    x' = a - b f(x, y) - d x - c v(x(t - eta)) + alpha z
    y' = b1 f(x(t - tau), y) - r p(y) - d1 y
    z' = r p(y(t - delta)) - alpha z

plus run-time monitors for positivity and for the Phi-aggregate bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from . import _core
from .dde import NEGLIGIBLE_LAG, History, IntegratorConfig, Trajectory, build_mesh
from .errors import DomainError, NumericalBlowup
from .functions import IncidenceSpec, LipschitzBounds, TreatmentSpec, VaccinationSpec


def _check_nonneg(obj, label):
    for f_ in fields(obj):
        value = getattr(obj, f_.name)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise DomainError(f"{label}.{f_.name} must be a number", )
        if not math.isfinite(value) or value < 0:
            raise DomainError(f"{label}.{f_.name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class ModelParams:
    """Rates of the model (per day; ``a`` in individuals per day)."""

    a: float
    b: float
    c: float
    d: float
    b1: float
    r: float
    d1: float
    alpha: float

    def __post_init__(self):
        _check_nonneg(self, "params")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.b1, self.r, self.d1, self.alpha])

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DelaySpec:
    """Vaccination (eta), incidence (tau) and treatment (delta) delays in days."""

    eta: float = 0.0
    tau: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        _check_nonneg(self, "delays")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.eta, self.tau, self.delta)


@dataclass(frozen=True)
class State:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"state.{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @property
    def nonnegative(self) -> bool:
        return self.x >= 0 and self.y >= 0 and self.z >= 0


def rhs(params: ModelParams, f: IncidenceSpec, v: VaccinationSpec, p: TreatmentSpec,
        now: State, x_lag_eta: float, x_lag_tau: float, y_lag_delta: float) -> np.ndarray:
    """Right-hand side with the three delayed arguments supplied explicitly.

    The delayed incidence is ``f(x(t - tau), y(t))``: susceptibles lagged,
    infected current.
    """
    x, y, z = now.x, now.y, now.z
    pr = params
    out = np.array([
        pr.a - pr.b * f(x, y) - pr.d * x - pr.c * v(x_lag_eta) + pr.alpha * z,
        pr.b1 * f(x_lag_tau, y) - pr.r * p(y) - pr.d1 * y,
        pr.r * p(y_lag_delta) - pr.alpha * z,
    ])
    if not np.all(np.isfinite(out)):
        raise NumericalBlowup(float("nan"), "non-finite model derivative")
    return out


def delayed_field(params, f, v, p):
    """Adapter to the generic engine: lags ordered (eta, tau, delta)."""

    def field(t, u, delayed):
        x, y, z = u
        return rhs(params, f, v, p, State(x, y, z), delayed[0][0], delayed[1][0], delayed[2][1])

    return field


def simulate_system(params: ModelParams, f: IncidenceSpec, v: VaccinationSpec,
                    p: TreatmentSpec, delays: DelaySpec, init: State,
                    t_end: float, history: History | None = None,
                    cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the model on [0, t_end] with the selected kernel backend."""
    cfg = cfg or IntegratorConfig()
    u0 = init.as_array()
    if history is None:
        history = History.constant(u0)
    if history.dim != 3:
        raise DomainError("history must be three-dimensional")
    lags = delays.as_tuple()
    mesh = build_mesh(lags, (0.0, float(t_end)), cfg)
    if history.mode == "constant":
        ht, hu = np.zeros(1), history.values[None, :]
    else:
        ht, hu = history.times, history.values
    U, F, fail = _core.integrate_sir(
        mesh, params.as_array(), f.code, f.coefficients(), v.code, v.coefficients(),
        p.code, p.coefficients(), lags, ht, hu, u0, NEGLIGIBLE_LAG)
    if fail >= 0:
        raise NumericalBlowup(mesh[fail])
    return Trajectory(mesh, U, F, history)


def simulate(scenario, **overrides) -> Trajectory:
    """Run a scenario; ``overrides`` replace delay fields or rates by name."""
    sc = scenario.with_overrides(**overrides) if overrides else scenario
    try:
        return simulate_system(sc.params, sc.incidence, sc.vaccination, sc.treatment,
                               sc.delays, sc.initial, sc.t_end, sc.history, sc.integrator)
    except NumericalBlowup as exc:
        raise NumericalBlowup(exc.time, f"scenario {sc.name!r}: {exc}") from exc


@dataclass(frozen=True)
class PositivityReport:
    min_value: float
    min_component: str
    min_time: float
    first_violation: float | None

    @property
    def ok(self) -> bool:
        return self.first_violation is None


def check_positivity(traj: Trajectory, tol: float = 1e-6) -> PositivityReport:
    """Scan nodes and interval midpoints for components below ``-tol``."""
    if len(traj.t) > 1:
        mids = 0.5 * (traj.t[:-1] + traj.t[1:])
        times = np.empty(2 * len(traj.t) - 1)
        times[0::2] = traj.t
        times[1::2] = mids
        vals = np.empty((len(times), traj.u.shape[1]))
        vals[0::2] = traj.u
        vals[1::2] = traj.sample(mids)
    else:
        times, vals = traj.t, traj.u
    flat = int(np.argmin(vals))
    row, col = divmod(flat, vals.shape[1])
    bad = np.nonzero(np.any(vals < -tol, axis=1))[0]
    names = "xyz" if vals.shape[1] == 3 else [str(i) for i in range(vals.shape[1])]
    return PositivityReport(
        min_value=float(vals[row, col]), min_component=names[col], min_time=float(times[row]),
        first_violation=float(times[bad[0]]) if len(bad) else None)


@dataclass(frozen=True)
class BoundednessCertificate:
    """Comparison bound ``Phi(t) <= max(a/gamma, Phi(0))`` when gamma > 0."""

    gamma: float
    gamma_x: float
    gamma_y: float
    bound: float
    phi0: float
    holds: bool


def boundedness_certificate(params: ModelParams, L: LipschitzBounds,
                            phi0: float) -> BoundednessCertificate:
    pr = params
    gx = pr.b * L.K1 + pr.d + pr.c * L.M1 - pr.b1 * L.K3
    gy = pr.b * L.K2 - pr.b1 * L.K4 + pr.d1 + pr.r * L.L1 - pr.r * L.L2
    gamma = min(gx, gy)
    holds = gamma > 0
    bound = max(pr.a / gamma, phi0) if holds else math.inf
    return BoundednessCertificate(gamma, gx, gy, bound, phi0, holds)


def phi_initial(params: ModelParams, L: LipschitzBounds, delays: DelaySpec, init: State) -> float:
    """Phi at t = 0 under constant history equal to the initial state."""
    pr = params
    return ((1.0 - pr.c * L.M1 * delays.eta + pr.b1 * L.K3 * delays.tau) * abs(init.x)
            + (1.0 + pr.r * L.L2 * delays.delta) * abs(init.y) + abs(init.z))


def phi_series(traj: Trajectory, params: ModelParams, L: LipschitzBounds,
               delays: DelaySpec) -> np.ndarray:
    """Phi(t) at every mesh node.

    The windowed integrals are exact integrals of the dense output, so the
    trajectory is assumed nonnegative (check with ``check_positivity``).
    """
    pr = params
    t = traj.t
    absu = np.abs(traj.u)
    out = absu.sum(axis=1)
    win_eta = traj.integral(t - delays.eta, t)[:, 0]
    win_tau = traj.integral(t - delays.tau, t)[:, 0]
    win_delta = traj.integral(t - delays.delta, t)[:, 1]
    return (out - pr.c * L.M1 * win_eta + pr.b1 * L.K3 * win_tau
            + pr.r * L.L2 * win_delta)
