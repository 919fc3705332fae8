"""Comparison constants, trust-region assembly, and safe-set validation."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frida.curvature import (
    CurvatureDomainError,
    CurvatureProfile,
    SafeSetGeometry,
    alpha_plus,
    b_minus,
    c_minus,
    delta_plus,
    hessian_bounds,
    l_log_pm,
    subproblem_moduli,
    tau,
    trust_radius,
    zeta_minus,
)

SPHERE = CurvatureProfile(0.0, 1.0, 0.0, 2.0)
FLAT = CurvatureProfile(0.0, 0.0, 0.0, 2.0)
MIXED = CurvatureProfile(0.8, 1.5, 0.3, 2.0)

ALL_FUNS = [delta_plus, zeta_minus, alpha_plus, b_minus, c_minus]


# --- basic values and limits -------------------------------------------------


def test_all_comparison_functions_are_one_at_zero():
    for fun in ALL_FUNS:
        assert fun(0.0, 1.0) == 1.0
        assert fun(0.0, 0.0) == 1.0
        assert fun(1.7, 0.0) == 1.0  # flat curvature, any radius


def test_closed_forms_match_definitions():
    t = 0.73
    assert delta_plus(t, 1.0) == pytest.approx(t / math.tan(t), rel=1e-15)
    assert zeta_minus(t, 1.0) == pytest.approx(t / math.tanh(t), rel=1e-15)
    assert alpha_plus(t, 1.0) == pytest.approx(t / math.sin(t), rel=1e-15)
    assert b_minus(t, 1.0) == pytest.approx(math.sinh(t) / t, rel=1e-15)
    assert c_minus(t, 1.0) == pytest.approx(math.cosh(t), rel=1e-15)


@given(st.floats(min_value=1e-12, max_value=3.0), st.floats(min_value=1e-6, max_value=4.0))
@settings(max_examples=200, deadline=None)
def test_curvature_enters_only_through_t_sqrt_lambda(t, lam):
    u = t * math.sqrt(lam)
    for fun in ALL_FUNS:
        if fun in (delta_plus, alpha_plus) and u >= math.pi - 1e-9:
            continue
        assert fun(t, lam) == pytest.approx(fun(u, 1.0), rel=1e-12)


def test_series_branch_is_continuous_at_the_cutoff():
    """Both branches agree at the same input to near machine precision, so the
    1e-4 switchover introduces no jump."""
    u_lo, u_hi = 0.999e-4, 1.001e-4  # series branch / closed-form branch

    def series(coeffs, u):
        u2 = u * u
        return coeffs[0] + coeffs[1] * u2 + coeffs[2] * u2 * u2 + coeffs[3] * u2 * u2 * u2

    closed = {
        delta_plus: lambda u: u * math.cos(u) / math.sin(u),
        zeta_minus: lambda u: u * math.cosh(u) / math.sinh(u),
        alpha_plus: lambda u: u / math.sin(u),
        b_minus: lambda u: math.sinh(u) / u,
        c_minus: math.cosh,
    }
    taylor = {
        delta_plus: (1.0, -1.0 / 3.0, -1.0 / 45.0, -2.0 / 945.0),
        zeta_minus: (1.0, 1.0 / 3.0, -1.0 / 45.0, 2.0 / 945.0),
        alpha_plus: (1.0, 1.0 / 6.0, 7.0 / 360.0, 31.0 / 15120.0),
        b_minus: (1.0, 1.0 / 6.0, 1.0 / 120.0, 1.0 / 5040.0),
        c_minus: (1.0, 1.0 / 2.0, 1.0 / 24.0, 1.0 / 720.0),
    }
    for fun in ALL_FUNS:
        # below the cutoff the implementation uses the series: check it
        # against the closed form evaluated here
        assert fun(u_lo, 1.0) == pytest.approx(closed[fun](u_lo), abs=1e-12)
        # above the cutoff it uses the closed form: check it against the series
        assert fun(u_hi, 1.0) == pytest.approx(series(taylor[fun], u_hi), abs=1e-12)


def test_series_branch_beats_cancellation_near_zero():
    # the closed form loses ~8 digits here; the series value must stay exact
    assert delta_plus(1e-9, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert zeta_minus(1e-9, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert alpha_plus(1e-9, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_monotonicity_on_a_grid():
    ts = [0.01 * k for k in range(1, 310)]
    deltas = [delta_plus(t, 1.0) for t in ts if t < math.pi - 0.02]
    assert all(a > b for a, b in zip(deltas, deltas[1:]))
    for fun in (zeta_minus, b_minus, c_minus):
        vals = [fun(t, 1.0) for t in ts]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(v >= 1.0 for v in vals)
    alphas = [alpha_plus(t, 1.0) for t in ts if t < math.pi - 0.02]
    assert all(a < b for a, b in zip(alphas, alphas[1:]))
    assert all(v >= 1.0 for v in alphas)
    assert all(v <= 1.0 for v in deltas)


def test_delta_plus_sign_change_at_half_pi():
    assert delta_plus(math.pi / 2.0 - 1e-6, 1.0) > 0.0
    assert delta_plus(math.pi / 2.0 + 1e-6, 1.0) < 0.0


def test_domain_errors():
    for fun in (delta_plus, alpha_plus):
        with pytest.raises(CurvatureDomainError):
            fun(math.pi, 1.0)
        with pytest.raises(CurvatureDomainError):
            fun(4.0, 1.0)
    for fun in ALL_FUNS:
        with pytest.raises(CurvatureDomainError):
            fun(-0.1, 1.0)
        with pytest.raises(CurvatureDomainError):
            fun(float("nan"), 1.0)
        with pytest.raises(CurvatureDomainError):
            fun(0.5, -1.0)
    # zeta/b/c have no upper domain limit
    assert zeta_minus(50.0, 1.0) > 1.0
    assert b_minus(50.0, 1.0) > 1.0
    assert c_minus(50.0, 1.0) > 1.0


# --- curvature profile -------------------------------------------------------


def test_profile_validation_and_lam0():
    with pytest.raises(CurvatureDomainError):
        CurvatureProfile(-1.0, 0.0, 0.0, 2.0)
    with pytest.raises(CurvatureDomainError):
        CurvatureProfile(0.0, float("inf"), 0.0, 2.0)
    assert CurvatureProfile(0.5, 2.0, 0.0, 2.0).lam0 == 2.0
    assert CurvatureProfile(3.0, 2.0, 0.0, 2.0).lam0 == 3.0


def test_profile_combine_is_componentwise_max():
    a = CurvatureProfile(0.1, 2.0, 0.5, 2.0)
    b = CurvatureProfile(0.7, 1.0, 0.2, 3.0)
    c = a.combine(b)
    assert (c.lam_minus, c.lam_plus, c.l_r, c.c_n) == (0.7, 2.0, 0.5, 3.0)


# --- Lipschitz bound for dlog ------------------------------------------------


def test_l_log_frozen_sphere_values():
    # oracle: alpha(t)^3 * (5/6) * 2 * t with alpha = t / sin t, recomputed
    # independently of the implementation
    assert l_log_pm(0.2, SPHERE) == pytest.approx(0.34007620502045577, rel=1e-13)
    assert l_log_pm(0.5, SPHERE) == pytest.approx(0.9452904546290019, rel=1e-13)
    assert l_log_pm(1.0, SPHERE) == pytest.approx(2.7972501982343236, rel=1e-13)


def test_l_log_zero_on_flat_profiles():
    for t in (0.0, 0.3, 2.0, 10.0):
        assert l_log_pm(t, FLAT) == 0.0


def test_l_log_nondecreasing_and_zero_at_zero():
    assert l_log_pm(0.0, MIXED) == 0.0
    ts = [0.05 * k for k in range(1, 40)]
    vals = [l_log_pm(t, MIXED) for t in ts]
    assert all(v > 0.0 for v in vals)
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_l_log_mixed_profile_against_inline_oracle():
    t = 0.6
    a3 = (t * math.sqrt(1.5) / math.sin(t * math.sqrt(1.5))) ** 3
    b = math.sinh(t * math.sqrt(0.8)) / (t * math.sqrt(0.8))
    c = math.cosh(t * math.sqrt(0.8))
    want = a3 * (0.3 * t * t * b**3 / 6.0 + 5.0 * 2.0 * 1.5 * t * b * b * c / 6.0)
    assert l_log_pm(t, MIXED) == pytest.approx(want, rel=1e-13)


def test_hessian_bounds_are_the_comparison_pair():
    lo, hi = hessian_bounds(0.9, MIXED)
    assert lo == delta_plus(0.9, 1.5)
    assert hi == zeta_minus(0.9, 0.8)
    assert lo <= 1.0 <= hi


# --- safe sets ---------------------------------------------------------------


def test_safe_set_accepts_valid_geometry():
    s = SafeSetGeometry((0.0, 0.0, 1.0), 0.5, 1.0, 0.7, math.pi, SPHERE)
    assert s.delta_ex == pytest.approx(1.5 / math.tan(1.5), rel=1e-14)
    assert s.zeta_ex == 1.0  # lam_minus = 0


def test_safe_set_allows_nonpositive_delta_ex():
    # r + rho_ex past pi/2 is legitimate under the existence assumption
    s = SafeSetGeometry((0.0, 0.0, 1.0), 0.505, 1.5, 0.8, math.pi, SPHERE)
    assert s.delta_ex < 0.0


def test_safe_set_rejects_bad_radii():
    with pytest.raises(ValueError):
        SafeSetGeometry((0.0,), 1.0, 0.9, 0.7, math.pi, SPHERE)  # rho_ex <= r
    with pytest.raises(ValueError):
        SafeSetGeometry((0.0,), 0.5, 2.9, 0.7, math.pi, SPHERE)  # rho_ex too large
    with pytest.raises(ValueError):
        SafeSetGeometry((0.0,), 0.5, 1.0, 0.4, math.pi, SPHERE)  # rho <= r
    with pytest.raises(ValueError):
        SafeSetGeometry((0.0,), 0.5, 1.0, 1.6, math.pi, SPHERE)  # rho >= pi/2
    with pytest.raises(ValueError):
        SafeSetGeometry((0.0,), 0.5, 1.0, 0.7, -1.0, SPHERE)  # bad iota


def test_safe_set_flat_profile_uses_injectivity_only():
    s = SafeSetGeometry((0.0, 0.0), 0.3, 0.8, 0.5, 2.1, FLAT)
    assert s.zeta_ex == 1.0 and s.delta_ex == 1.0
    with pytest.raises(ValueError):
        SafeSetGeometry((0.0, 0.0), 0.3, 1.9, 0.5, 2.1, FLAT)  # > iota - r


# --- trust radius, tau, moduli -----------------------------------------------


def test_trust_radius_min_and_validation():
    assert trust_radius(1.0, 0.9, 0.7) == 0.7
    assert trust_radius(0.5, 0.9, 0.7) == pytest.approx(0.45)
    with pytest.raises(ValueError):
        trust_radius(0.0, 0.9, 0.7)
    with pytest.raises(ValueError):
        trust_radius(1.0, 1.0, 0.7)


def test_tau_frozen_example():
    # independent arithmetic: dk = 0.2 cot 0.2, ll = (0.2/sin 0.2)^3 * (1/3),
    # tau = (ll*1 - 2*0.6)/dk + 2*0.5/(dk*0.2) + 0.01
    got = tau(0.2, 1.0, 0.5, 1.0, 0.0, 0.6, 0.01, SPHERE)
    assert got == pytest.approx(4.2061749726415325, rel=1e-13)


def test_tau_floors():
    # large negative-weight mass with delta_ex < 0 pushes the second floor
    # above both the curvature term and 1
    got = tau(0.1, 0.0, 0.0, 0.0, 1.0, -0.5, 0.01, FLAT)
    assert got == pytest.approx(2.0)
    # all terms small: floor at exactly 1
    assert tau(0.5, 0.0, 0.0, 1.0, 0.0, 0.6, 0.0, FLAT) == 1.0


def test_tau_raises_past_convexity_domain():
    with pytest.raises(CurvatureDomainError):
        tau(1.6, 1.0, 1.0, 1.0, 0.0, 0.5, 0.01, SPHERE)  # delta_plus(1.6) < 0


def test_moduli_flat_identities():
    mu, big_l = subproblem_moduli(0.3, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, FLAT)
    assert (mu, big_l) == (3.0, 3.0)
    mu, big_l = subproblem_moduli(0.3, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, FLAT)
    assert (mu, big_l) == (1.0, 1.0)


def test_moduli_sphere_frozen_example():
    prof = SPHERE
    s = SafeSetGeometry((0.0, 0.0, 1.0), 0.5, 1.0, 0.7, math.pi, prof)
    mu, big_l = subproblem_moduli(0.3, 0.4, 2.0, 1.2, 0.5, s.delta_ex, s.zeta_ex, prof)
    assert mu == pytest.approx(1.9856963466021103, rel=1e-13)
    assert big_l == pytest.approx(4.609233979146935, rel=1e-13)
    assert mu < big_l


@given(
    r_k=st.floats(min_value=1e-3, max_value=1.4),
    gh=st.floats(min_value=0.0, max_value=5.0),
    gf=st.floats(min_value=0.0, max_value=5.0),
    w_plus=st.floats(min_value=0.0, max_value=4.0),
    w_minus=st.floats(min_value=0.0, max_value=3.0),
    delta_ex=st.floats(min_value=-1.0, max_value=1.0),
    eta0=st.floats(min_value=1e-4, max_value=0.5),
)
@settings(max_examples=300, deadline=None)
def test_tau_makes_the_subproblem_strongly_convex(r_k, gh, gf, w_plus, w_minus, delta_ex, eta0):
    """Whenever tau is assembled by the rule with eta0 > 0, the resulting
    subproblem modulus mu stays positive (the step is well-posed)."""
    prof = SPHERE
    t = tau(r_k, gh, gf, w_plus, w_minus, delta_ex, eta0, prof)
    assert t >= 1.0
    zeta_ex = 1.0
    mu, big_l = subproblem_moduli(r_k, gh, t, w_plus, w_minus, delta_ex, zeta_ex, prof)
    assert mu > 0.0
    assert mu >= eta0 * delta_plus(r_k, prof.lam_plus) - 1e-12
    assert big_l >= mu - 1e-12


@given(
    r_k=st.floats(min_value=1e-3, max_value=2.0),
    gh=st.floats(min_value=0.0, max_value=5.0),
    tau_k=st.floats(min_value=1.0, max_value=50.0),
    w_plus=st.floats(min_value=0.0, max_value=4.0),
)
@settings(max_examples=200, deadline=None)
def test_flat_moduli_coincide(r_k, gh, tau_k, w_plus):
    # on flat profiles the subproblem is a quadratic: mu == L exactly when
    # grad h carries no curvature penalty (l_log == 0)
    mu, big_l = subproblem_moduli(r_k, gh, tau_k, w_plus, 0.0, 1.0, 1.0, FLAT)
    assert mu == pytest.approx(big_l, rel=1e-14)
