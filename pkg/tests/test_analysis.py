import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from sirdelay.analysis import (COEFFICIENT_NAMES, basic_reproduction_number,
                               contraction_constants, contraction_map, delay_coefficients,
                               delay_ranges, disease_free_equilibrium, endemic_equilibrium,
                               equilibrium_residual, full_report, global_delay_independent,
                               local_stability_dfe, local_stability_endemic,
                               ranges_from_coefficients, report_to_dict, rightmost_real_root,
                               solve_equilibrium)
from sirdelay.errors import DomainError, NoEndemicEquilibrium
from sirdelay.functions import (IncidenceSpec, LipschitzBounds, TreatmentSpec, VaccinationSpec,
                                lipschitz_bounds)
from sirdelay.model import DelaySpec, ModelParams, State, rhs
from sirdelay.workbench import get_builtin

EX1, EX2, EX3 = (get_builtin(n) for n in ("tamilnadu", "india", "usa"))
LIN = (IncidenceSpec(), VaccinationSpec(), TreatmentSpec())


def _p(**kw):
    base = dict(a=2.0, b=1.0, c=0.0, d=1.0, b1=1.0, r=1.0, d1=1.0, alpha=1.0)
    base.update(kw)
    return ModelParams(**base)


# disease-free state and R0

def test_dfe_modes_example1():
    full = disease_free_equilibrium(EX1.params, EX1.vaccination, "full_dfe")
    assert full.x_star == pytest.approx(5 / 0.0759, rel=1e-12)
    compat = disease_free_equilibrium(EX1.params, EX1.vaccination, "paper_compat")
    assert compat.x_star == pytest.approx(76.9231, abs=1e-4)
    assert full.y_star == full.z_star == 0.0 and full.kind == "disease_free"


def test_dfe_modes_agree_without_vaccination():
    pr = EX1.params.with_(c=0.0)
    a = disease_free_equilibrium(pr, EX1.vaccination, "full_dfe").x_star
    b = disease_free_equilibrium(pr, EX1.vaccination, "paper_compat").x_star
    assert a == pytest.approx(b, rel=1e-12)


def test_dfe_nonlinear_vaccination_solves_equation():
    pr = _p(a=3.0, c=0.7, d=0.4)
    v = VaccinationSpec("saturating", a_sat=2.0)
    x = disease_free_equilibrium(pr, v).x_star
    assert abs(pr.a - pr.d * x - pr.c * v(x)) <= 1e-12 * pr.a
    with pytest.raises(DomainError):
        disease_free_equilibrium(pr, v, "other")


def test_r0_examples():
    for sc, want in ((EX2, 11.4545), (EX3, 3.8517)):
        dfe = disease_free_equilibrium(sc.params, sc.vaccination, "paper_compat")
        res = basic_reproduction_number(sc.params, sc.incidence, sc.treatment, dfe)
        assert res.r0 == pytest.approx(want, rel=1e-3)
        assert res.mode == "paper_compat"
    dfe2 = disease_free_equilibrium(EX2.params, EX2.vaccination, "paper_compat")
    assert dfe2.x_star == pytest.approx(2.4563, abs=1e-4)
    # hand arithmetic: f_y(x*, 0) = x*, p'(0) = 1
    hand = 0.32 * dfe2.x_star / (0.0686 + 0.00002021)
    assert basic_reproduction_number(EX2.params, EX2.incidence, EX2.treatment,
                                      dfe2).r0 == pytest.approx(hand, rel=1e-12)
    dfe3 = disease_free_equilibrium(EX3.params, EX3.vaccination, "paper_compat")
    assert dfe3.x_star == pytest.approx(1.33719, abs=1e-5)


def test_r0_zero_without_conversion_and_bad_denominator():
    pr = EX1.params.with_(b1=0.0)
    dfe = disease_free_equilibrium(pr, EX1.vaccination)
    assert basic_reproduction_number(pr, *LIN[::2], dfe).r0 == 0.0
    pr0 = EX1.params.with_(r=0.0, d1=0.0)
    with pytest.raises(DomainError):
        basic_reproduction_number(pr0, *LIN[::2], dfe)


INCIDENCES = [IncidenceSpec(), IncidenceSpec("power", c_pow=0.8, p_exp=1.2, q_exp=1.0),
              IncidenceSpec("saturated_in_x", b_sat=0.7), IncidenceSpec("saturated_in_y", a_sat=1.3)]
TREATMENTS = [TreatmentSpec(), TreatmentSpec("saturating", a_sat=0.6),
              TreatmentSpec("hyperbolic_sine"), TreatmentSpec("hyperbolic_tangent")]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3),
       st.lists(st.floats(0.05, 3.0), min_size=8, max_size=8))
def test_r0_matches_finite_differences(i, j, vals):
    pr = ModelParams(*vals)
    f, p = INCIDENCES[i], TREATMENTS[j]
    dfe = disease_free_equilibrium(pr, VaccinationSpec())
    xs, h = dfe.x_star, 1e-6
    fy = (f(xs, 2 * h) - f(xs, 0.0)) / (2 * h) if i == 1 else (f(xs, h) - f(xs, 0.0)) / h
    if i != 1:
        fy = (4 * f(xs, h) - f(xs, 2 * h) - 3 * f(xs, 0.0)) / (2 * h)
    p0 = (4 * p(h) - p(2 * h) - 3 * p(0.0)) / (2 * h)
    want = pr.b1 * fy / (pr.r * p0 + pr.d1)
    assert basic_reproduction_number(pr, f, p, dfe).r0 == pytest.approx(want, rel=1e-5)


# equilibria

def test_synthetic_tangency_has_only_disease_free_state():
    # a=2, b=b1=1, f=xy, c=0, p=y, r=d=d1=alpha=1: the y-equation forces x = 2
    # or y = 0, and with x = 2 the remaining two force y = z = 0.
    pr = _p()
    oracle = _brute_force_roots(pr)
    assert all(np.allclose(o, [2.0, 0.0, 0.0], atol=1e-6) for o in oracle)
    eq = solve_equilibrium(pr, *LIN, (1.0, 1.0, 1.0))
    assert eq.residual <= 1e-10 and eq.kind == "disease_free"
    np.testing.assert_allclose(eq.as_array(), [2.0, 0.0, 0.0], atol=1e-12)
    with pytest.raises(NoEndemicEquilibrium):
        endemic_equilibrium(pr, *LIN, State(1.0, 1.0, 1.0))


def _brute_force_roots(pr, step=0.05):
    """Coarse grid over [0, 4]^3 then Newton polish of the best cells."""
    g = np.arange(0.0, 4.0 + step / 2, step)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    R = np.stack([pr.a - pr.b * X * Y - pr.d * X + pr.alpha * Z,
                  pr.b1 * X * Y - pr.r * Y - pr.d1 * Y,
                  pr.r * Y - pr.alpha * Z])
    norm = np.max(np.abs(R), axis=0)
    idx = np.argsort(norm, axis=None)[:20]
    out = []
    for k in idx:
        start = np.array([X.flat[k], Y.flat[k], Z.flat[k]])
        sol = optimize.root(lambda u: equilibrium_residual(pr, *LIN, u), start, tol=1e-14)
        if np.max(np.abs(sol.fun)) <= 1e-10 and np.all(sol.x >= -1e-9):
            out.append(sol.x)
    return out


def test_synthetic_endemic_state():
    # a=3: x = 2, z = y and 3 - 2y - 2 + y = 0 give (2, 1, 1)
    pr = _p(a=3.0)
    oracle = [o for o in _brute_force_roots(pr) if o[1] > 1e-6]
    assert oracle and np.allclose(oracle[0], [2.0, 1.0, 1.0], atol=1e-8)
    eq = endemic_equilibrium(pr, *LIN, State(0.5, 3.0, 0.2))
    np.testing.assert_allclose(eq.as_array(), [2.0, 1.0, 1.0], atol=1e-8)
    assert eq.kind == "endemic" and eq.residual <= 1e-10
    d = rhs(pr, *LIN, eq.as_state(), eq.x_star, eq.x_star, eq.y_star)
    assert np.linalg.norm(d) <= 1e-8
    fp = contraction_map(pr, *LIN, eq.as_array())
    np.testing.assert_allclose(fp, eq.as_array(), atol=1e-9)


def test_endemic_from_dfe_side_with_r0_below_one():
    dfe = disease_free_equilibrium(EX1.params, EX1.vaccination)
    with pytest.raises(NoEndemicEquilibrium):
        endemic_equilibrium(EX1.params, *LIN, State(dfe.x_star, 1e-3, 1e-3))
    with pytest.raises(DomainError):
        endemic_equilibrium(EX1.params, *LIN, State(1.0, 0.0, 1.0))


# contraction constants

def test_contraction_examples():
    L = LipschitzBounds.unit()
    cc = contraction_constants(_p(b=0, b1=0, c=0, r=0, alpha=0.4, d=2.0), L)
    assert (cc.A, cc.B, cc.C) == (0.0, 0.0, 0.2)
    cc = contraction_constants(_p(alpha=0.7, d=0.7), L)
    assert cc.C == 1.0 and not cc.unique
    # b1 K3 = 1, d1 = 2, b K3 = 1, d = 1, c M1 = 0
    cc = contraction_constants(_p(b1=1.0, d1=2.0, b=1.0, d=1.0, c=0.0), L)
    assert cc.A == pytest.approx(-0.5)
    assert cc.A_bar == max(cc.A, cc.B, cc.C)
    with pytest.raises(DomainError):
        contraction_constants(_p(d1=0.0), L)


# characteristic roots

def test_root_examples():
    assert rightmost_real_root(-1.0, 0.0, 3.0).rightmost_real_root == -1.0
    fac = rightmost_real_root(0.0, 1.0, 0.0)
    assert fac.rightmost_real_root == 1.0 and fac.method == "closed_form_sign"
    fac = rightmost_real_root(-0.0017, 0.1087, 1.2)
    want = optimize.brentq(lambda l: l + 0.0017 - 0.1087 * math.exp(-1.2 * l), 0.0, 1.0,
                           xtol=1e-15)
    assert fac.rightmost_real_root == pytest.approx(want, abs=1e-12) and want > 0
    assert fac.method == "bisection" and not fac.stable


def test_root_none_found_fallback():
    # g(lambda) = lambda + 2 + exp(-lambda) is positive everywhere
    fac = rightmost_real_root(-2.0, -1.0, 1.0)
    assert fac.rightmost_real_root is None and fac.method == "none_found" and fac.stable
    fac = rightmost_real_root(-1.0, -0.1, 1.0)
    assert fac.method == "bisection" and fac.rightmost_real_root == pytest.approx(-1.40931511, abs=1e-8)
    with pytest.raises(DomainError):
        rightmost_real_root(0.0, 1.0, -1.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 10))
def test_root_certificate(A, B, T):
    fac = rightmost_real_root(A, B, T)
    lam = fac.rightmost_real_root
    if lam is None:
        assert B < 0 and T > 0
        return
    assert abs(lam - A - B * math.exp(-lam * T)) <= 1e-10 * max(1.0, abs(A), abs(B))
    if B >= 0 and abs(A + B) > 1e-12:
        assert math.copysign(1, lam) == math.copysign(1, A + B)


# local stability

def test_dfe_verdict_example1_inconclusive():
    dfe = disease_free_equilibrium(EX1.params, EX1.vaccination, "paper_compat")
    ver = local_stability_dfe(EX1.params, *LIN, dfe, EX1.delays)
    assert ver.status == "inconclusive"
    assert "dfe_treatment_condition_violated" in ver.flags
    assert ver.values["r0"] < 1 and ver.values["recovered_factor"]["root"] > 0


def test_dfe_verdict_stable_and_unstable():
    pr = _p(a=1.0, b1=0.2, r=0.5, alpha=1.0)
    dfe = disease_free_equilibrium(pr, VaccinationSpec())
    ver = local_stability_dfe(pr, *LIN, dfe, DelaySpec(1.0, 1.0, 1.0))
    assert ver.status == "stable" and ver.flags == ()
    dfe2 = disease_free_equilibrium(EX2.params, EX2.vaccination, "paper_compat")
    ver2 = local_stability_dfe(EX2.params, EX2.incidence, EX2.vaccination, EX2.treatment,
                               dfe2, EX2.delays)
    assert ver2.status == "unstable"


def test_endemic_verdicts():
    pr = _p(a=3.0)
    eq = endemic_equilibrium(pr, *LIN, State(1.0, 1.0, 1.0))
    ver = local_stability_endemic(pr, *LIN, eq, DelaySpec())
    # r p'(y*) = alpha -> treatment condition fails
    assert ver.status == "inconclusive" and "endemic_treatment_condition_fails" in ver.flags
    # f = xy/(1 + 5y): x* = 3, y* = 0.4, z* = 0.2 by hand; both left sides below 1
    pr2 = _p(a=3.0, b1=2.0, alpha=2.0)
    f = IncidenceSpec("saturated_in_y", a_sat=5.0)
    eq2 = endemic_equilibrium(pr2, f, LIN[1], LIN[2], State(1.0, 1.0, 1.0))
    np.testing.assert_allclose(eq2.as_array(), [3.0, 0.4, 0.2], atol=1e-9)
    ver2 = local_stability_endemic(pr2, f, LIN[1], LIN[2], eq2, DelaySpec())
    x, y = 3.0, 0.4
    lhs = 2.0 * (x / (1 + 5 * y) ** 2 + y / (1 + 5 * y)) / 2.0
    assert ver2.values["infection_condition"] == pytest.approx(lhs, rel=1e-8)
    assert ver2.values["treatment_condition"] == pytest.approx(0.5)
    assert ver2.status == "stable" and ver2.flags == ()
    zero = local_stability_endemic(pr2.with_(b1=0.0), f, LIN[1], LIN[2], eq2, DelaySpec())
    assert zero.values["infection_condition"] == 0.0


# delay-independent conditions

def test_global_modes_coincide_without_treatment():
    L = LipschitzBounds(1, 1, 2, 2, 1, 1, 1, 1)
    v = global_delay_independent(_p(r=0.0), L).values
    assert v["y_condition_derivation"] == v["y_condition_strict"]
    w = global_delay_independent(_p(r=0.3), L).values
    assert w["y_condition_strict"] - w["y_condition_derivation"] == pytest.approx(0.6)


def test_global_holds_without_conversion():
    L = LipschitzBounds(1, 1, 2, 2, 1, 1, 1, 1)
    for mode in ("derivation", "strict_paper"):
        assert global_delay_independent(_p(b1=0.0), L, mode).status == "holds"


def test_global_mode_boundary_instance():
    # y-condition without r terms is -0.1; + r L1 - r L2 keeps it there,
    # + r L1 + r L2 with r L2 = 0.1 lifts it to +0.1
    L = LipschitzBounds(1, 1, 1, 1.6, 1, 1, 1, 1)
    pr = _p(b=1.0, b1=1.0, d1=0.5, r=0.1)
    der = global_delay_independent(pr, L, "derivation")
    strict = global_delay_independent(pr, L, "strict_paper")
    assert der.status == "fails" and strict.status == "holds"
    assert "delay_independent_modes_disagree" in der.flags
    pr2 = pr.with_(r=0.04)
    assert global_delay_independent(pr2, L, "strict_paper").status == "fails"
    assert not global_delay_independent(pr2, L).flags


def test_global_example1_values():
    L = lipschitz_bounds(*LIN, EX1.box)
    v = global_delay_independent(EX1.params, L).values
    pr = EX1.params
    assert v["x_condition"] == pytest.approx(pr.b * 1 - pr.b1 * 50 + pr.d + pr.c)
    assert v["y_condition_derivation"] == pytest.approx(pr.b * 1 - pr.b1 * 300 + pr.d1)


# delay ranges

def test_ranges_direct_min():
    huge = 1e300
    r, s, q = ranges_from_coefficients(1.0, 3.0, 2.0, 1.0, 1.0, huge, huge, huge, huge, huge)
    assert r == 0.5


def test_ranges_without_vaccination():
    L = LipschitzBounds(1, 1, 2, 2, 1, 1, 1, 1)
    dr = delay_ranges(_p(c=0.0, b1=0.1), L)
    assert dr.B1 == dr.B2 == dr.B3 == 0.0 and dr.r_max == math.inf
    assert dr.s_max == min(dr.A1 / dr.C1, dr.A2 / dr.C2)


def test_ranges_a1_mode_boundary_instance():
    # b K1 - b1 K3 + c M1 = -0.3, d = 0.5, d1 = 0.1
    L = LipschitzBounds(1, 1, 1.3, 1.3, 1, 1, 1, 1)
    pr = _p(b=1.0, b1=1.0, c=0.0, d=0.5, d1=0.1, r=0.0)
    assert delay_coefficients(pr, L, "derivation")["A1"] == pytest.approx(0.2)
    assert delay_coefficients(pr, L, "strict_paper")["A1"] == pytest.approx(-0.2)
    same = pr.with_(d=0.1)
    assert (delay_coefficients(same, L, "derivation")
            == delay_coefficients(same, L, "strict_paper"))


def test_published_ranges_reproduced_with_unit_constants():
    L = LipschitzBounds.unit()
    want = {"tamilnadu": (13.6841, 124.2974, 0.050), "india": (11.9066, 0.6252, 3.0016),
            "usa": (8.2307, 0.1646, 1.0446)}
    for sc in (EX1, EX2, EX3):
        dr = delay_ranges(sc.params, L, "strict_paper")
        got = (dr.r_max, dr.s_max, dr.q_max)
        for g, w in zip(got, want[sc.name]):
            assert g == pytest.approx(w, abs=6e-4 if w == 0.050 else 1e-4)


def test_z_coefficient_and_admits():
    L = LipschitzBounds.unit()
    dr = delay_ranges(EX2.params, L, "strict_paper")
    d = DelaySpec(0.5, 0.5, 0.5)
    assert dr.z_coefficient(d) == pytest.approx(dr.B3 * 0.5 - dr.C3 * 0.5)
    assert dr.admits(d) == (dr.feasible and 0.5 < dr.r_max and 0.5 < dr.s_max
                            and 0.5 < dr.q_max)


# full report

def test_full_report_examples():
    rep = full_report(EX1.with_overrides(dfe_mode="paper_compat"))
    assert rep.r0.r0 == pytest.approx(0.8445, abs=1e-4)
    assert "r0_differs_from_reference" in rep.flags
    rep3 = full_report(EX3.with_overrides(dfe_mode="paper_compat"))
    assert rep3.r0.r0 == pytest.approx(3.8517, rel=1e-4)
    assert rep3.local_dfe.status == "unstable"
    doc = report_to_dict(rep3)
    cmp = doc["delay_ranges"]["comparison"]
    assert cmp is not None


def test_full_report_without_conversion():
    from dataclasses import replace

    sc = replace(EX1, params=EX1.params.with_(b1=0.0))
    rep = full_report(sc)
    assert rep.r0.r0 == 0.0
    fac = rep.local_dfe.values["infected_factor"]
    assert fac["stable"]
