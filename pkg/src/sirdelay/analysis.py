"""Equilibria, reproduction number and stability conditions of the model.

Each check returns the inequality values it was decided on, so a verdict can
always be audited.  Where the published statements disagree with their own
derivations two formula modes are offered:

``derivation``
    signs/symbols as they fall out of the Lyapunov computations;
``strict_paper``
    the conditions exactly as printed in the theorem statements.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AnalysisError, DomainError, NoEndemicEquilibrium, NonConvergence
from .functions import (IncidenceSpec, LipschitzBounds, TreatmentSpec, VaccinationSpec,
                        lipschitz_bounds)
from .model import DelaySpec, ModelParams, State

DFE_MODES = ("full_dfe", "paper_compat")
THEOREM_MODES = ("derivation", "strict_paper")

FP_DAMPING = 0.5
FP_STEPS = 200
MAX_ITERATIONS = 1000


@dataclass(frozen=True)
class Equilibrium:
    kind: str
    x_star: float
    y_star: float
    z_star: float
    residual: float
    iterations: int
    method: str = ""

    def as_state(self) -> State:
        return State(self.x_star, self.y_star, self.z_star)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_star, self.y_star, self.z_star])


def _check_mode(mode, allowed):
    if mode not in allowed:
        raise DomainError(f"mode must be one of {allowed}, got {mode!r}")


def disease_free_equilibrium(params: ModelParams, v: VaccinationSpec,
                             mode: str = "full_dfe") -> Equilibrium:
    """(x*, 0, 0) with a - d x* - c v(x*) = 0.

    ``paper_compat`` drops the vaccination term (x* = a/d), which is what the
    published reproduction numbers correspond to.
    """
    _check_mode(mode, DFE_MODES)
    pr = params
    if pr.d <= 0:
        raise DomainError("disease-free equilibrium needs d > 0")
    x_hi = pr.a / pr.d
    if mode == "paper_compat":
        return Equilibrium("disease_free", x_hi, 0.0, 0.0, 0.0, 0, "closed_form")

    def g(x):
        return pr.a - pr.d * x - pr.c * v(x)

    lo, hi = 0.0, x_hi
    g_lo, g_hi = g(lo), g(hi)
    if g_hi == 0.0:
        return Equilibrium("disease_free", hi, 0.0, 0.0, 0.0, 0, "bisection")
    if g_lo == 0.0:
        return Equilibrium("disease_free", lo, 0.0, 0.0, 0.0, 0, "bisection")
    if g_lo * g_hi > 0:
        raise AnalysisError("disease-free equation has no sign change on [0, a/d]")
    it = 0
    while hi - lo > 1e-12 * max(hi, 1e-300) and it < 200:
        mid = 0.5 * (lo + hi)
        if (g(mid) > 0) == (g_lo > 0):
            lo = mid
        else:
            hi = mid
        it += 1
    x = 0.5 * (lo + hi)
    return Equilibrium("disease_free", x, 0.0, 0.0, abs(g(x)), it, "bisection")


def equilibrium_residual(params, f, v, p, point) -> np.ndarray:
    """Left-hand sides of the three stationarity equations."""
    x, y, z = point
    pr = params
    fxy = f(x, y)
    py = p(y)
    return np.array([
        pr.a - pr.b * fxy - pr.d * x - pr.c * v(x) + pr.alpha * z,
        pr.b1 * fxy - pr.r * py - pr.d1 * y,
        pr.r * py - pr.alpha * z,
    ])


def contraction_map(params, f, v, p, point) -> np.ndarray:
    """The map (F, G, H) whose fixed points are the equilibria."""
    x, y, z = point
    pr = params
    if pr.d <= 0 or pr.d1 <= 0 or pr.alpha <= 0:
        raise DomainError("contraction map needs d, d1, alpha > 0")
    fxy = f(x, y)
    py = p(y)
    return np.array([
        (pr.a - pr.b * fxy - pr.c * v(x) + pr.alpha * z) / pr.d,
        (pr.b1 * fxy - pr.r * py) / pr.d1,
        pr.r * py / pr.alpha,
    ])


def _fd_jacobian(fun, x):
    n = len(x)
    J = np.empty((n, n))
    # components share population units, so tiny ones borrow the overall scale
    floor = max(1e-3 * float(np.max(np.abs(x))), 1e-12)
    for j in range(n):
        step = 1e-7 * max(abs(x[j]), floor)
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        J[:, j] = (fun(xp) - fun(xm)) / (2 * step)
    return J


def _safe_norm(fun, x):
    try:
        with np.errstate(all="ignore"):
            r = fun(x)
        n = float(np.max(np.abs(r)))
    except (OverflowError, ZeroDivisionError, ValueError):
        return math.inf, None
    return (n if math.isfinite(n) else math.inf), r


def solve_equilibrium(params, f, v, p, init, tol: float = 1e-10) -> Equilibrium:
    """Damped fixed-point iteration of the contraction map, then Newton.

    The first ``FP_STEPS`` iterations use X <- (1-w) X + w P(X) with w = 0.5;
    if they do not reach ``tol`` the best iterate seeds a Newton iteration on
    the stationarity residual (central finite-difference Jacobian,
    backtracking).  Raises ``NonConvergence`` after ``MAX_ITERATIONS``.
    """

    def res(u):
        return equilibrium_residual(params, f, v, p, u)

    def done(X, norm, it, method):
        Y = _snap_to_dfe(params, v, res, X, tol)
        if Y is not X:
            norm = _safe_norm(res, Y)[0]
        return _classify(Y, norm, it, method)

    X = np.array(init, dtype=float)
    if X.shape != (3,) or not np.all(np.isfinite(X)):
        raise DomainError("init must be a finite 3-vector")
    best, best_norm = X.copy(), _safe_norm(res, X)[0]
    it = 0
    method = "fixed_point"
    while it < FP_STEPS:
        norm = _safe_norm(res, X)[0]
        if norm < best_norm:
            best, best_norm = X.copy(), norm
        if norm <= tol:
            return done(X, norm, it, method)
        try:
            with np.errstate(all="ignore"):
                X = (1 - FP_DAMPING) * X + FP_DAMPING * contraction_map(params, f, v, p, X)
        except (OverflowError, ZeroDivisionError, ValueError):
            break
        it += 1
        if not np.all(np.isfinite(X)):
            break
    it = max(it, 1)
    method = "newton"
    X = best.copy()
    norm, r = _safe_norm(res, X)
    while it < MAX_ITERATIONS:
        if norm <= tol:
            return done(X, norm, it, method)
        try:
            with np.errstate(all="ignore"):
                J = _fd_jacobian(res, X)
            step = np.linalg.solve(J, -r)
        except (np.linalg.LinAlgError, OverflowError, ZeroDivisionError, ValueError):
            break
        if not np.all(np.isfinite(step)):
            break
        lam = 1.0
        for _ in range(40):
            trial = X + lam * step
            t_norm, t_r = _safe_norm(res, trial)
            if t_norm < norm or lam < 1e-10:
                break
            lam *= 0.5
        if not t_norm < norm:
            # no decrease possible at this precision
            it += 1
            break
        X, norm, r = trial, t_norm, t_r
        it += 1
    raise NonConvergence("equilibrium solver did not converge", norm, it)


def _snap_to_dfe(params, v, res, X, tol):
    """Replace X by the disease-free state when the two are indistinguishable.

    At a tangency (R0 = 1) the residual grows only quadratically with the
    distance, so points within sqrt(tol) of the disease-free state pass the
    tolerance without being genuine endemic states.
    """
    if params.d <= 0:
        return X
    scale = max(1.0, float(np.sum(np.abs(X))))
    if max(abs(X[1]), abs(X[2])) > math.sqrt(tol) * scale:
        return X
    dfe = disease_free_equilibrium(params, v, "full_dfe").as_array()
    if np.max(np.abs(dfe - X)) > math.sqrt(tol) * scale:
        return X
    norm, _ = _safe_norm(res, dfe)
    return dfe if norm <= tol else X


def _classify(X, norm, it, method):
    x, y, z = (float(v) for v in X)
    scale = max(1.0, abs(x) + abs(y) + abs(z))
    floor = 1e-9 * scale
    if abs(y) <= floor and abs(z) <= floor:
        kind = "disease_free"
    elif x > floor and y > floor and z > floor:
        kind = "endemic"
    else:
        kind = "other"
    return Equilibrium(kind, x, y, z, float(norm), int(it), method)


def endemic_equilibrium(params, f, v, p, init: State, tol: float = 1e-10) -> Equilibrium:
    """Strictly positive stationary state reached from ``init``."""
    u0 = init.as_array() if isinstance(init, State) else np.asarray(init, dtype=float)
    if np.any(u0 <= 0):
        raise DomainError("endemic solver needs a strictly positive starting point")
    eq = solve_equilibrium(params, f, v, p, u0, tol)
    if eq.kind != "endemic":
        raise NoEndemicEquilibrium((eq.x_star, eq.y_star, eq.z_star))
    return eq


@dataclass(frozen=True)
class ContractionConstants:
    A: float
    B: float
    C: float
    A_bar: float

    @property
    def unique(self) -> bool:
        return self.A_bar < 1


def contraction_constants(params: ModelParams, L: LipschitzBounds) -> ContractionConstants:
    pr = params
    if pr.d <= 0 or pr.d1 <= 0 or pr.alpha <= 0:
        raise DomainError("contraction constants need d, d1, alpha > 0")
    A = pr.b1 * L.K3 / pr.d1 - pr.b * L.K3 / pr.d - pr.c * L.M1 / pr.d
    B = pr.b1 * L.K4 / pr.d1 - pr.b * L.K4 / pr.d + pr.r * L.L2 / pr.alpha - pr.r * L.L2 / pr.d1
    C = pr.alpha / pr.d
    return ContractionConstants(A, B, C, max(A, B, C))


@dataclass(frozen=True)
class R0Result:
    r0: float
    x_star_used: float
    f_y_at_dfe: float
    p_prime_0: float
    mode: str


def basic_reproduction_number(params: ModelParams, f: IncidenceSpec, p: TreatmentSpec,
                              dfe: Equilibrium) -> R0Result:
    """b1 f_y(x*, 0) / (r p'(0) + d1)."""
    from .functions import partial

    fy = partial(f, "y", (dfe.x_star, 0.0))
    p0 = partial(p, "y", 0.0)
    den = params.r * p0 + params.d1
    if den <= 0:
        raise DomainError("r p'(0) + d1 must be positive")
    mode = "paper_compat" if dfe.method == "closed_form" else "full_dfe"
    return R0Result(params.b1 * fy / den, dfe.x_star, fy, p0, mode)


@dataclass(frozen=True)
class CharacteristicFactor:
    """Scalar factor lambda = A + B exp(-lambda T)."""

    A_coef: float
    B_coef: float
    T_lag: float
    rightmost_real_root: float | None
    method: str

    @property
    def stable(self) -> bool:
        if self.rightmost_real_root is not None:
            return self.rightmost_real_root < 0
        return self.A_coef + abs(self.B_coef) < 0


def _bisect(g, lo, hi):
    g_lo = g(lo)
    # enough halvings to shrink any finite double bracket to rounding
    for _ in range(1100):
        if hi - lo <= 1e-14 * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (g_lo < 0):
            lo, g_lo = mid, gm
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def rightmost_real_root(A_coef: float, B_coef: float, T_lag: float) -> CharacteristicFactor:
    """Largest real root of lambda - A - B exp(-lambda T).

    For B >= 0 the function is increasing, so the root is unique and has the
    sign of A + B.  For B < 0 it is convex with minimum at
    ln(|B| T)/T; the rightmost root (if any) lies to the right of it.
    """
    A, B, T = float(A_coef), float(B_coef), float(T_lag)
    if not all(math.isfinite(v) for v in (A, B, T)) or T < 0:
        raise DomainError("characteristic factor needs finite A, B and T >= 0")
    if T == 0.0 or B == 0.0:
        return CharacteristicFactor(A, B, T, A + B, "closed_form_sign")

    def g(lam):
        e = -lam * T
        if e > 700:
            return -math.copysign(math.inf, B) if B != 0 else lam - A
        return lam - A - B * math.exp(e)

    if B > 0:
        lo = A
        hi = A + B if A + B >= 0 else 0.0
        return CharacteristicFactor(A, B, T, _bisect(g, lo, hi), "bisection")
    lam_min = (math.log(-B) + math.log(T)) / T
    if g(lam_min) > 0:
        return CharacteristicFactor(A, B, T, None, "none_found")
    return CharacteristicFactor(A, B, T, _bisect(g, lam_min, A - B), "bisection")


@dataclass(frozen=True)
class Verdict:
    status: str
    values: dict = field(default_factory=dict)
    flags: tuple = ()


def _factor_dict(fac: CharacteristicFactor) -> dict:
    return {"A": fac.A_coef, "B": fac.B_coef, "T": fac.T_lag,
            "root": fac.rightmost_real_root, "method": fac.method, "stable": fac.stable}


def local_stability_dfe(params, f, v, p, dfe: Equilibrium, delays: DelaySpec) -> Verdict:
    """Threshold verdict at the disease-free state.

    R0 > 1 is decisive (unstable).  Otherwise the three scalar factors of the
    triangular characteristic matrix are examined; a nonnegative treatment
    factor means the extra treatment condition fails and the verdict is
    inconclusive.
    """
    pr = params
    xs = dfe.x_star
    r0 = basic_reproduction_number(pr, f, p, dfe)
    fx = f.dx(xs, 0.0)
    fy = f.dy(xs, 0.0)
    p0 = p.slope(0.0)
    t_fac = rightmost_real_root(-pr.b * fx - pr.d, -pr.c * v.slope(xs), delays.eta)
    f_fac = rightmost_real_root(pr.b1 * fy - pr.r * p0 - pr.d1, pr.b1 * fx, delays.tau)
    h_fac = rightmost_real_root(-pr.alpha, pr.r * p0, delays.delta)
    treat_ratio = pr.r * p0 / pr.alpha if pr.alpha > 0 else math.inf
    values = {"r0": r0.r0, "treatment_ratio": treat_ratio,
              "susceptible_factor": _factor_dict(t_fac),
              "infected_factor": _factor_dict(f_fac),
              "recovered_factor": _factor_dict(h_fac)}
    flags = []
    if r0.r0 > 1:
        return Verdict("unstable", values, ())
    if not h_fac.stable:
        flags.append("dfe_treatment_condition_violated")
    if not t_fac.stable:
        flags.append("dfe_susceptible_factor_nonnegative")
    if not f_fac.stable:
        flags.append("dfe_infected_factor_nonnegative")
    if r0.r0 == 1:
        flags.append("r0_at_threshold")
    status = "stable" if not flags else "inconclusive"
    return Verdict(status, values, tuple(flags))


def local_stability_endemic(params, f, v, p, ee: Equilibrium, delays: DelaySpec) -> Verdict:
    """Sufficient conditions at the endemic state with exp(-lambda .) = 1."""
    pr = params
    xs, ys = ee.x_star, ee.y_star
    fx, fy = f.dx(xs, ys), f.dy(xs, ys)
    py = p.slope(ys)
    den = pr.r * py + pr.d1
    cond1 = pr.b1 * (fy + fx) / den if den > 0 else math.inf
    cond2 = pr.r * py / pr.alpha if pr.alpha > 0 else math.inf
    t_fac = rightmost_real_root(-pr.b * fx - pr.d, -pr.c * v.slope(xs), delays.eta)
    f_fac = rightmost_real_root(pr.b1 * fy - pr.r * py - pr.d1, pr.b1 * fx, delays.tau)
    h_fac = rightmost_real_root(-pr.alpha, pr.r * py, delays.delta)
    values = {"infection_condition": cond1, "treatment_condition": cond2,
              "susceptible_factor": _factor_dict(t_fac),
              "infected_factor": _factor_dict(f_fac),
              "recovered_factor": _factor_dict(h_fac)}
    flags = []
    if not cond1 < 1:
        flags.append("endemic_infection_condition_fails")
    if not cond2 < 1:
        flags.append("endemic_treatment_condition_fails")
    return Verdict("stable" if not flags else "inconclusive", values, tuple(flags))


def global_delay_independent(params: ModelParams, L: LipschitzBounds,
                             mode: str = "derivation") -> Verdict:
    """Delay-independent Lyapunov conditions.

    x-condition: b K1 - b1 K3 + d + c M1 > 0.  y-condition: the derivation
    gives b K2 - b1 K4 + r L1 - r L2 + d1 > 0, the printed statement has
    + r L2 instead.  Both are reported.
    """
    _check_mode(mode, THEOREM_MODES)
    pr = params
    gx = pr.b * L.K1 - pr.b1 * L.K3 + pr.d + pr.c * L.M1
    gy_der = pr.b * L.K2 - pr.b1 * L.K4 + pr.r * L.L1 - pr.r * L.L2 + pr.d1
    gy_str = pr.b * L.K2 - pr.b1 * L.K4 + pr.r * L.L1 + pr.r * L.L2 + pr.d1
    holds_der = gx > 0 and gy_der > 0
    holds_str = gx > 0 and gy_str > 0
    holds = holds_der if mode == "derivation" else holds_str
    flags = () if holds_der == holds_str else ("delay_independent_modes_disagree",)
    values = {"mode": mode, "x_condition": gx, "y_condition_derivation": gy_der,
              "y_condition_strict": gy_str, "holds_derivation": holds_der,
              "holds_strict": holds_str}
    return Verdict("holds" if holds else "fails", values, flags)


COEFFICIENT_NAMES = ("A1", "A2", "B1", "B2", "B3", "C1", "C2", "C3", "D1", "D2")


def delay_coefficients(params: ModelParams, L: LipschitzBounds, mode: str = "derivation") -> dict:
    _check_mode(mode, THEOREM_MODES)
    pr = params
    b, c, d, b1, r, d1, al = pr.b, pr.c, pr.d, pr.b1, pr.r, pr.d1, pr.alpha
    K1, K2, K3, K4, M1, M2, L1, L2 = (L.K1, L.K2, L.K3, L.K4, L.M1, L.M2, L.L1, L.L2)
    death = d if mode == "derivation" else d1
    return {
        "A1": b * K1 - b1 * K3 + death + c * M1,
        "A2": b * K2 - b1 * K4 + r * L1 - r * L2 + d1,
        "B1": c * b * M1 * K1 + c * d * M1 + c * c * M1 * M2,
        "B2": b1 * c * M1 * K2,
        "B3": c * M1 * al,
        "C1": b1 * K3 * K3 * b + b1 * d * K3 + b1 * K3 * c * M2,
        "C2": b1 * b * K3 * K4,
        "C3": b1 * K3 * al,
        "D1": r * L2 * b1 * K3,
        "D2": r * L2 * b1 * K4 + r * r * L2 * L2 + r * L2 * d1,
    }


def _min_ratio(pairs):
    terms = [num / den for num, den in pairs if den > 0]
    return min(terms) if terms else math.inf


def ranges_from_coefficients(A1, A2, B1, B2, B3, C1, C2, C3, D1, D2):
    """(r_max, s_max, q_max); ratios with a zero denominator are skipped."""
    r_max = _min_ratio([(A1, B1), (A2, B2)])
    s_max = _min_ratio([(A1, C1), (A2, C2), (A1 * B3, C3 * B1), (A2 * B3, C3 * B2)])
    q_max = _min_ratio([(A1, D1), (A2, D2)])
    return r_max, s_max, q_max


@dataclass(frozen=True)
class DelayRanges:
    A1: float
    A2: float
    B1: float
    B2: float
    B3: float
    C1: float
    C2: float
    C3: float
    D1: float
    D2: float
    r_max: float
    s_max: float
    q_max: float
    feasible: bool
    mode: str = "derivation"

    def coefficients(self) -> dict:
        return {k: getattr(self, k) for k in COEFFICIENT_NAMES}

    def z_coefficient(self, delays: DelaySpec) -> float:
        """B3 eta - C3 tau; the Lyapunov bound needs it positive."""
        return self.B3 * delays.eta - self.C3 * delays.tau

    def admits(self, delays: DelaySpec) -> bool:
        return (self.feasible and 0 < delays.eta < self.r_max and 0 < delays.tau < self.s_max
                and 0 < delays.delta < self.q_max)


def delay_ranges(params: ModelParams, L: LipschitzBounds, mode: str = "derivation") -> DelayRanges:
    """Admissible delay windows (0, r), (0, s), (0, q) for eta, tau, delta."""
    co = delay_coefficients(params, L, mode)
    r_max, s_max, q_max = ranges_from_coefficients(*(co[k] for k in COEFFICIENT_NAMES))
    feasible = co["A1"] > 0 and co["A2"] > 0
    return DelayRanges(**co, r_max=r_max, s_max=s_max, q_max=q_max, feasible=feasible, mode=mode)


@dataclass
class StabilityReport:
    scenario: str
    r0: R0Result
    dfe: Equilibrium
    endemic: Equilibrium | None
    endemic_status: str
    lipschitz: LipschitzBounds
    contraction: ContractionConstants
    local_dfe: Verdict
    local_endemic: Verdict | None
    global_independent: Verdict
    delay_ranges: DelayRanges
    comparison: dict
    flags: list = field(default_factory=list)
    failed_sections: list = field(default_factory=list)


REFERENCE_RTOL = 1e-3


def _close(a, b, rtol=REFERENCE_RTOL):
    return a is not None and b is not None and math.isfinite(a) and abs(a - b) <= rtol * abs(b)


def full_report(scenario, tol: float = 1e-10) -> StabilityReport:
    """Run every analysis on a scenario and collect discrepancy flags."""
    sc = scenario
    pr, f, v, p = sc.params, sc.incidence, sc.vaccination, sc.treatment
    flags: list[str] = []
    failed: list[str] = []
    for spec in (v, p):
        if not spec.conforming:
            flags.append(f"{spec.LABEL}_constant_nonconforming")

    L = lipschitz_bounds(f, v, p, sc.box)
    if L.warnings:
        flags.append("lipschitz_lower_constant_zero")
    dfe = disease_free_equilibrium(pr, v, sc.dfe_mode)
    r0 = basic_reproduction_number(pr, f, p, dfe)
    contraction = contraction_constants(pr, L)
    local_dfe = local_stability_dfe(pr, f, v, p, dfe, sc.delays)
    flags.extend(local_dfe.flags)

    endemic = None
    local_end = None
    x0 = sc.initial.as_array()
    start = x0 if np.all(x0 > 0) else np.array([max(dfe.x_star, 1e-6)] + [1e-3 * max(dfe.x_star, 1e-3)] * 2)
    try:
        endemic = endemic_equilibrium(pr, f, v, p, start, tol)
        endemic_status = "found"
    except NoEndemicEquilibrium:
        endemic_status = "none"
        flags.append("no_endemic_equilibrium")
    except NonConvergence as exc:
        endemic_status = f"failed: {exc}"
        failed.append("endemic")
        flags.append("endemic_solver_nonconvergence")
    if endemic is not None:
        local_end = local_stability_endemic(pr, f, v, p, endemic, sc.delays)
        flags.extend(local_end.flags)

    glob = global_delay_independent(pr, L, sc.theorem_mode)
    flags.extend(glob.flags)
    ranges = delay_ranges(pr, L, sc.theorem_mode)
    if not ranges.feasible:
        flags.append("delay_ranges_infeasible")
    elif not ranges.admits(sc.delays):
        flags.append("scenario_delays_outside_certified_ranges")
    if ranges.z_coefficient(sc.delays) <= 0:
        flags.append("recovered_coefficient_nonpositive")

    comparison = _reference_comparison(sc, pr, r0)
    if comparison.get("r0_matches") is False:
        flags.append("r0_differs_from_reference")
    for key in ("eta", "tau", "delta"):
        if comparison.get("ranges", {}).get(key, {}).get("matches") is False:
            flags.append(f"{key}_range_differs_from_reference")

    return StabilityReport(sc.name, r0, dfe, endemic, endemic_status, L, contraction, local_dfe,
                           local_end, glob, ranges, comparison, flags, failed)


def _reference_comparison(sc, pr, r0: R0Result) -> dict:
    """Side-by-side with reference values carried by the scenario.

    Reference ranges are compared with the strict-statement coefficients at
    unit Lipschitz constants, which is how the published ranges arise.
    """
    ref = getattr(sc, "reference", None) or {}
    out: dict = {}
    if "r0" in ref:
        out["r0_reference"] = ref["r0"]
        out["r0_computed"] = r0.r0
        out["r0_matches"] = _close(r0.r0, ref["r0"])
    unit = delay_ranges(pr, LipschitzBounds.unit(), "strict_paper")
    names = {"eta": "r_max", "tau": "s_max", "delta": "q_max"}
    ranges = {}
    for key, attr in names.items():
        if key not in ref:
            continue
        candidates = list(ref[key])
        value = getattr(unit, attr)
        ranges[key] = {"reference": candidates, "unit_constants_strict": value,
                       "matches": any(_close(value, c) for c in candidates)}
    if ranges:
        out["ranges"] = ranges
    return out


def report_to_dict(rep: StabilityReport) -> dict:
    """JSON-ready document with the fixed top-level field set."""

    def num(x):
        if x is None:
            return None
        x = float(x)
        return x if math.isfinite(x) else None

    def verdict(vd):
        if vd is None:
            return None
        return {"status": vd.status, "values": _clean(vd.values), "flags": list(vd.flags)}

    def eq(e):
        if e is None:
            return None
        return {"kind": e.kind, "x": e.x_star, "y": e.y_star, "z": e.z_star,
                "residual": e.residual, "iterations": e.iterations, "method": e.method}

    dr = rep.delay_ranges
    return {
        "r0": {"value": rep.r0.r0, "mode": rep.r0.mode, "x_star": rep.r0.x_star_used,
               "f_y_at_dfe": rep.r0.f_y_at_dfe, "p_prime_0": rep.r0.p_prime_0},
        "dfe": eq(rep.dfe),
        "endemic": {"status": rep.endemic_status, "equilibrium": eq(rep.endemic),
                    "failed": "endemic" in rep.failed_sections},
        "contraction": {"A": rep.contraction.A, "B": rep.contraction.B, "C": rep.contraction.C,
                        "A_bar": rep.contraction.A_bar, "unique": rep.contraction.unique,
                        "lipschitz": rep.lipschitz.as_dict()},
        "local_dfe": verdict(rep.local_dfe),
        "local_endemic": verdict(rep.local_endemic),
        "global_independent": verdict(rep.global_independent),
        "delay_ranges": {
            "mode": dr.mode, "coefficients": dr.coefficients(),
            "r_max": num(dr.r_max), "s_max": num(dr.s_max), "q_max": num(dr.q_max),
            "feasible": dr.feasible, "comparison": _clean(rep.comparison)},
        "flags": list(rep.flags),
    }


def _clean(obj):
    """Replace non-finite floats by None (JSON has no infinity)."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, np.floating):
        return _clean(float(obj))
    return obj
