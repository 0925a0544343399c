"""Norm functionals: dual-route values against the layer integral, scaling
identities, divergence power counting, sup-norm search, and decay fits."""

import math

import numpy as np
import pytest
from pytest import approx

from cole_lab.norms import (BracketingError, DegenerateFitError,
                            DivergenceError, NormReport, NormSpec,
                            decay_fit, default_t_grid, grad_lp_norm,
                            hess_bound_lp, hessian_frobenius_lp,
                            hessian_frobenius_sq, linf_norm, lp_distance,
                            lp_norm, norm_sweep, sphere_measure)
from cole_lab.quadrature import Integrand, integrate_semi_infinite, layer_power_integral
from cole_lab.solutions import (Params, SolutionFamily, cartesian_components,
                                main_example, nonstationary_erf, self_similar,
                                stationary)

MAIN = main_example(Params(3, 0.1, a=1.0))
MAIN0 = main_example(Params(3, 0.1, a=0.0))
SS = self_similar(Params(3, 0.005, a=1.0))
ST0 = stationary(Params(3, 0.1, C=0.0))
ST1 = stationary(Params(3, 0.1, C=1.0))
NST = nonstationary_erf(0.1)


def test_sphere_measure_small_dimensions():
    assert sphere_measure(2) == approx(2.0 * math.pi, rel=1e-15)
    assert sphere_measure(3) == approx(4.0 * math.pi, rel=1e-15)
    assert sphere_measure(4) == approx(2.0 * math.pi ** 2, rel=1e-15)


def test_default_t_grid_shape():
    ts = default_t_grid()
    assert ts[0] == approx(1e-2) and ts[-1] == approx(1e-8) and len(ts) == 13


# ---------------------------------------------------------------------------
# L^p dual route: for the main example the p-th power of the norm reduces
# algebraically to the bare layer integral with c = p + n - 1
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,p,mu,a,t", [
    (3, 1.0, 0.1, 1.0, 1e-3),
    (3, 2.0, 0.1, 1.0, 1e-6),
    (5, 2.5, 0.03, 0.7, 1e-4),
    (2, 1.0, 1.0, 2.0, 1e-2),
])
def test_lp_norm_matches_layer_integral(n, p, mu, a, t):
    fam = main_example(Params(n, mu, a=a))
    b = a * (4.0 * math.pi * mu) ** (0.5 * n)
    layer = layer_power_integral(c=p + n - 1.0, b=b, l=p, n=n, mu=mu, t=t)
    want = (sphere_measure(n) * t ** (-p) * layer.value) ** (1.0 / p)
    got = lp_norm(fam, NormSpec("lp", p=p, n=n), t)
    assert got == approx(want, rel=1e-9)


def test_self_similar_norms_scale_exactly():
    # ||u(t)||_p / ||u(t0)||_p = (t/t0)^((n-p)/(2p)) with no log correction
    for n, p in ((3, 1.0), (3, 2.0), (4, 2.0)):
        fam = self_similar(Params(n, 0.005, a=1.0))
        spec = NormSpec("lp", p=p, n=n)
        t0, t1 = 1e-2, 1e-5
        ratio = lp_norm(fam, spec, t1) / lp_norm(fam, spec, t0)
        assert ratio == approx((t1 / t0) ** ((n - p) / (2.0 * p)), rel=1e-9)


def test_supercritical_lp_grows():
    # p > n: same machinery, opposite direction as t -> 0
    spec = NormSpec("lp", p=4.0, n=3)
    assert lp_norm(MAIN, spec, 1e-6) > lp_norm(MAIN, spec, 1e-2)


def test_lp_norm_spec_validation():
    with pytest.raises(ValueError):
        NormSpec("area", p=2.0)
    with pytest.raises(ValueError):
        NormSpec("lp", p=0.5)
    with pytest.raises(ValueError):
        NormSpec("lp_distance", p=2.0)     # no reference supplied
    with pytest.raises(ValueError):
        lp_norm(MAIN, NormSpec("linf"), 1e-3)
    with pytest.raises(ValueError):
        lp_norm(MAIN, NormSpec("lp", p=2.0, n=4), 1e-3)


# ---------------------------------------------------------------------------
# divergence power counting
# ---------------------------------------------------------------------------

def test_divergent_cases_raise():
    # stationary C=0 tail ~ 1/r: fails at infinity for p <= n
    with pytest.raises(DivergenceError):
        lp_norm(ST0, NormSpec("lp", p=2.0, n=3), 1.0)
    # degenerate a=0 main example u = r/t grows at infinity
    with pytest.raises(DivergenceError):
        lp_norm(MAIN0, NormSpec("lp", p=2.0, n=3), 1e-3)
    # erf family tends to 2mu/r, so L^2 diverges; L^4 does not
    with pytest.raises(DivergenceError):
        lp_norm(NST, NormSpec("lp", p=2.0, n=3), 1e-3)
    assert math.isfinite(lp_norm(NST, NormSpec("lp", p=4.0, n=3), 1e-3))
    # self-similar 1/r singularity at the origin kills p >= 3
    with pytest.raises(DivergenceError):
        lp_norm(SS, NormSpec("lp", p=3.0, n=3), 1e-3)
    assert math.isfinite(lp_norm(SS, NormSpec("lp", p=2.0, n=3), 1e-3))
    # stationary C=1 decays like 1/r^2: L^2 is actually finite
    assert math.isfinite(lp_norm(ST1, NormSpec("lp", p=2.0, n=3), 1.0))


# ---------------------------------------------------------------------------
# L^p distances
# ---------------------------------------------------------------------------

def test_distance_of_family_with_itself_is_zero():
    assert lp_distance(MAIN, MAIN, 2.0, 1e-3) == 0.0
    clone = main_example(Params(3, 0.1, a=1.0))
    assert lp_distance(clone, MAIN, 2.0, 1e-3) == 0.0


def test_erf_distance_dual_route():
    # closed-form route |u_nst - u_st| = sqrt(mu/t) w(z) vs raw pointwise
    # subtraction fed to the generic quadrature
    mu, t, n = 0.1, 1e-3, 3
    root = math.sqrt(4.0 * mu * t)
    for p in (1.0, 2.0):
        def f(r):
            return np.abs(NST.u(t, r) - ST0.u(t, r)) ** p * r ** (n - 1.0)
        raw = integrate_semi_infinite(
            Integrand(f, small_r_exponent=-p + n - 1.0,
                      decay=("gaussian", root / math.sqrt(p)), splits=(root,)),
            rel_tol=1e-11)
        assert raw.converged
        want = (sphere_measure(n) * raw.value) ** (1.0 / p)
        assert lp_distance(NST, ST0, p, t) == approx(want, rel=1e-9)


def test_erf_distance_symmetric_and_divergent_at_p3():
    t = 1e-3
    assert lp_distance(ST0, NST, 2.0, t) == lp_distance(NST, ST0, 2.0, t)
    with pytest.raises(DivergenceError):
        lp_distance(NST, ST0, 3.0, t)


def test_erf_distance_exact_slope():
    # sqrt(mu/t) w(r/sqrt(4mu t)) scales exactly: slope (3-p)/(2p)
    spec = NormSpec("lp_distance", p=1.0, n=3, reference=ST0)
    fit = decay_fit(norm_sweep(NST, spec, np.geomspace(1e-2, 1e-6, 9)))
    assert fit.slope == approx(1.0, abs=1e-9)
    assert fit.max_log_residual < 1e-9


def test_generic_distance_route():
    # dissimilar singular families take the generic subtraction path
    t, p, n = 0.37, 2.0, 3
    d = lp_distance(SS, ST1, p, t)
    assert math.isfinite(d) and d > 0.0
    assert lp_distance(ST1, SS, p, t) == d


def test_distance_dimension_mismatch():
    ss4 = self_similar(Params(4, 0.005, a=1.0))
    with pytest.raises(ValueError):
        lp_distance(ss4, ST1, 2.0, 0.1)


# ---------------------------------------------------------------------------
# gradient and Hessian quantities
# ---------------------------------------------------------------------------

def test_grad_bound_dominates_exact_norm():
    # pointwise |Du|_F <= bound integrands gives norm <= 2 (omega B)^(1/p)
    for p in (1.0, 2.0):
        for t in (1e-3, 1e-5, 1e-7):
            res = grad_lp_norm(MAIN, p, t)
            assert res.bound_1 > 0.0 and res.bound_2 > 0.0
            cap = 2.0 * (sphere_measure(3) * res.bound_sum) ** (1.0 / p)
            assert res.value < cap


def test_grad_bounds_only_for_main_example():
    res = grad_lp_norm(NST, 4.0, 1e-3)
    assert math.isfinite(res.value) and res.bound_1 is None
    assert res.bound_sum is None


def test_grad_divergent_for_strong_singularity():
    # |Du| ~ 1/r^2 for the self-similar family: fails for p >= 1.5 in n=3
    with pytest.raises(DivergenceError):
        grad_lp_norm(SS, 2.0, 1e-3)


def test_hess_bound_terms_positive_and_restricted():
    res = hess_bound_lp(MAIN, 1.5, 1e-4)
    assert res.term_1 > 0.0 and res.term_2 > 0.0 and res.term_3 > 0.0
    assert res.total == approx(res.term_1 + res.term_2 + res.term_3, rel=1e-15)
    with pytest.raises(ValueError):
        hess_bound_lp(SS, 1.5, 1e-4)
    with pytest.raises(DivergenceError):
        hess_bound_lp(MAIN, 3.0, 1e-4)   # first exponent n-p-1 hits -1


def test_frobenius_formulas_match_cartesian_tensors():
    # |Du|_F^2 and |D^2u|_F^2 computed from the radial shape functions must
    # equal the naive sums over the assembled Cartesian components
    t = 0.37
    x = np.array([0.21, -0.12, 0.32])
    r = float(np.linalg.norm(x))
    for fam in (MAIN, NST, SS, ST1):
        _, jac, second = cartesian_components(fam, t, x)
        n = fam.params.n
        du_sq = fam.u_r(t, r) ** 2 + (n - 1.0) * fam.g(t, r) ** 2
        assert float(np.sum(jac * jac)) == approx(du_sq, rel=1e-12)
        assert float(np.sum(second * second)) == approx(
            float(hessian_frobenius_sq(fam, t, r)), rel=1e-12)


def test_hessian_exact_norm_finite_for_main():
    v = hessian_frobenius_lp(MAIN, 2.0, 1e-4)
    assert math.isfinite(v) and v > 0.0


# ---------------------------------------------------------------------------
# L^infinity
# ---------------------------------------------------------------------------

def test_linf_finds_interior_maximum():
    t = 1e-3
    val, r_star = linf_norm(MAIN, t)
    assert val == approx(MAIN.u(t, r_star), rel=1e-12)
    # stationarity at the found maximum, measured against the peak scale
    assert abs(MAIN.u_r(t, r_star)) <= 1e-4 * val / r_star
    grid = np.geomspace(1e-4, 1.0, 200) * math.sqrt(4.0 * 0.1 * t)
    assert val >= np.max(np.abs(MAIN.u(t, grid)))


def test_linf_grows_as_t_shrinks():
    assert linf_norm(MAIN, 1e-6)[0] > 10.0 * linf_norm(MAIN, 1e-2)[0]


def test_linf_unbounded_shortcuts():
    assert linf_norm(SS, 0.1) == (math.inf, 0.0)
    assert linf_norm(ST1, 0.1) == (math.inf, 0.0)
    assert linf_norm(MAIN0, 0.1) == (math.inf, math.inf)


def test_linf_nst_finite():
    val, r_star = linf_norm(NST, 0.37)
    assert 0.0 < val < math.inf and r_star > 0.0


def test_linf_bracketing_failure():
    flat = SolutionFamily(
        kind="Flat", params=Params(3, 0.1), origin_regular=True,
        u=lambda t, r: np.ones_like(np.asarray(r, dtype=float)),
        u_r=lambda t, r: np.zeros_like(np.asarray(r, dtype=float)),
        u_rr=lambda t, r: np.zeros_like(np.asarray(r, dtype=float)),
        u_t=lambda t, r: np.zeros_like(np.asarray(r, dtype=float)),
        g=None, g_r=None, P=None, W=None,
        small_r_exponent=0.0, tail=lambda t: ("gaussian", 1.0))
    with pytest.raises(BracketingError):
        linf_norm(flat, 0.1)


# ---------------------------------------------------------------------------
# sweeps and decay fits
# ---------------------------------------------------------------------------

def test_norm_sweep_ok_flags_and_errors():
    spec = NormSpec("lp", p=2.0, n=3)
    rep = norm_sweep(MAIN, spec, np.geomspace(1e-2, 1e-6, 5))
    assert rep.flags == ("ok",) * 5
    assert all(v > 0.0 for v in rep.values)
    assert all(e <= 1e-8 * v for v, e in zip(rep.values, rep.quad_errors))
    assert rep.family == MAIN.label()


def test_norm_sweep_divergent_flags():
    spec = NormSpec("lp", p=2.0, n=3)
    rep = norm_sweep(NST, spec, (1e-2, 1e-4))
    assert rep.flags == ("divergent", "divergent")
    assert all(math.isnan(v) for v in rep.values)


def test_norm_sweep_unbounded_flags():
    rep = norm_sweep(SS, NormSpec("linf", n=3), (1e-2, 1e-4))
    assert rep.flags == ("unbounded", "unbounded")


def test_decay_fit_exact_self_similar_law():
    fam = self_similar(Params(4, 0.02, a=1.0))
    rep = norm_sweep(fam, NormSpec("lp", p=2.0, n=4), np.geomspace(1e-2, 1e-6, 9))
    fit = decay_fit(rep)
    assert fit.slope == approx(0.5, abs=1e-9)     # (n-p)/(2p)
    assert fit.max_log_residual < 1e-9
    assert fit.n_points == 9


def test_decay_fit_rejects_degenerate_input():
    spec = NormSpec("lp", p=2.0, n=3)
    flat = NormReport(family="x", spec=spec, t_grid=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
                      values=(2.0, 2.0, 2.0, 2.0, 2.0),
                      quad_errors=(0.0,) * 5, flags=("ok",) * 5)
    with pytest.raises(DegenerateFitError):
        decay_fit(flat)
    sparse = NormReport(family="x", spec=spec, t_grid=(1e-2, 1e-3, 1e-4, 1e-5),
                        values=(1.0, 10.0, float("nan"), float("nan")),
                        quad_errors=(0.0,) * 4,
                        flags=("ok", "ok", "divergent", "divergent"))
    with pytest.raises(DegenerateFitError):
        decay_fit(sparse)
