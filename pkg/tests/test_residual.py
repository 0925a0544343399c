"""Residual verification: every family satisfies the system to rounding,
the two PDE groupings agree, finite-difference re-derivation converges at
stencil order, and the origin limits hold."""

import math

import numpy as np
import pytest
from pytest import approx

from cole_lab.residual import (Grid1D, divergence_form_residual,
                               cartesian_residual, origin_limit_check,
                               radial_residual, residual_pointwise)
from cole_lab.solutions import (HeatFunction, Params, cole_hopf, main_example,
                                nonstationary_erf, self_similar, stationary)

MAIN = main_example(Params(3, 0.1, a=1.0))
NST = nonstationary_erf(0.1)
SS = self_similar(Params(3, 0.005, a=1.0))
ST = stationary(Params(3, 0.1, C=1.0))

GRIDS = [
    ("main", MAIN, Grid1D(1e-4, 0.1, 100, (2e-5, 1e-3), spacing="log")),
    ("nst", NST, Grid1D(1e-3, 0.3, 100, (1e-3, 0.2))),
    ("ss", SS, Grid1D(1e-5, 7e-4, 100, (1e-5, 5e-5), spacing="log")),
    ("st", ST, Grid1D(0.1, 2.0, 100, (1.0,))),
]


@pytest.mark.parametrize("name,fam,grid", GRIDS, ids=[g[0] for g in GRIDS])
def test_analytic_residual_at_rounding_level(name, fam, grid):
    rep = radial_residual(fam, grid)
    assert rep.max_abs_scaled <= 1e-13
    assert rep.l2_scaled <= rep.max_abs_scaled
    assert rep.worst_t in grid.t_values
    assert rep.derivative_source == "analytic" and rep.form == "radial"


@pytest.mark.parametrize("name,fam,grid", GRIDS, ids=[g[0] for g in GRIDS])
def test_divergence_form_agrees_with_radial(name, fam, grid):
    assert divergence_form_residual(fam, grid).max_abs_scaled <= 1e-13
    # same points, same derivatives, different grouping: rounding-level gap
    t = grid.t_values[-1]
    r = grid.radii()[1:]
    gap = residual_pointwise(fam, t, r, form="radial") \
        - residual_pointwise(fam, t, r, form="divergence")
    assert np.max(np.abs(gap)) <= 1e-13


@pytest.mark.parametrize("fam,grid_args,t", [
    (MAIN, (1e-4, 0.1), 1e-3),
    (NST, (1e-3, 0.3), 0.1),
])
def test_finite_difference_residual_converges(fam, grid_args, t):
    # 5-point stencils: truncation is O(h^4); the contract asks for
    # observed order >= 2 and the measurement sits near 4
    lo, hi = grid_args
    maxima = []
    for nr in (32, 64, 128, 256):
        rep = radial_residual(fam, Grid1D(lo, hi, nr, (t,)),
                              derivative_source="finite-difference")
        maxima.append(rep.max_abs_scaled)
    orders = [math.log2(a / b) for a, b in zip(maxima[:-1], maxima[1:])]
    assert all(o >= 2.0 for o in orders)
    assert maxima[-1] < 1e-4


def test_finite_difference_shrinks_stencil_at_left_edge():
    # points whose stencil would cross r = 0 are dropped, not evaluated
    g = Grid1D(0.0, 0.1, 50, (1e-3,))
    rep = radial_residual(MAIN, g, derivative_source="finite-difference")
    assert rep.n_points < 51
    assert rep.max_abs_scaled < 1e-2


def test_cartesian_residual_including_origin():
    pts = [np.zeros(3), np.array([0.02, 0.01, -0.015]), np.array([0.0, 0.05, 0.0])]
    rep = cartesian_residual(MAIN, 1e-3, pts)
    assert rep.max_abs_scaled <= 1e-13
    assert rep.form == "cartesian" and rep.n_points == 3
    assert cartesian_residual(NST, 0.1, [np.zeros(3), np.array([0.05, -0.04, 0.1])]
                              ).max_abs_scaled <= 1e-13
    assert cartesian_residual(SS, 1e-5, [np.array([2e-4, 1e-4, -1e-4])]
                              ).max_abs_scaled <= 1e-13


def test_zero_solution_residual_is_zero():
    zeros = lambda t, r: np.zeros_like(np.asarray(r, dtype=float))
    const = HeatFunction(theta=lambda t, r: np.ones_like(np.asarray(r, dtype=float)),
                         theta_r=zeros, theta_rr=zeros, theta_rrr=zeros,
                         theta_t=zeros, theta_rt=zeros)
    fam = cole_hopf(const, mu=0.1, n=3)
    rep = radial_residual(fam, Grid1D(0.1, 1.0, 32, (0.5,)))
    assert rep.max_abs_scaled == 0.0


def test_singular_family_on_grid_touching_zero():
    # r = 0 nodes are excluded automatically; no singularity is evaluated
    g = Grid1D(0.0, 7e-4, 32, (1e-5,))
    rep = radial_residual(SS, g)
    assert rep.n_points == 32
    assert rep.max_abs_scaled <= 1e-13


def test_residual_pointwise_validation():
    with pytest.raises(ValueError):
        residual_pointwise(MAIN, 1e-3, [0.01], form="weak")
    with pytest.raises(ValueError):
        residual_pointwise(MAIN, 1e-3, [0.01], derivative_source="symbolic")
    with pytest.raises(ValueError):
        residual_pointwise(MAIN, 1e-3, [0.01], derivative_source="finite-difference")


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 8, (0.1,))              # nr too small
    with pytest.raises(ValueError):
        Grid1D(-0.1, 1.0, 32, (0.1,))
    with pytest.raises(ValueError):
        Grid1D(0.5, 0.5, 32, (0.1,))
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 32, (0.1,), spacing="chebyshev")
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 32, (0.1,), spacing="log")
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 32, ())
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, 32, (0.1, -0.2))


def test_grid_radii():
    g = Grid1D(1e-3, 1.0, 30, (0.1,), spacing="log")
    r = g.radii()
    assert len(r) == 31 and r[0] == approx(1e-3) and r[-1] == approx(1.0)
    assert np.all(np.diff(np.log(r)) > 0.0)


def test_origin_limit_check_passes_for_main():
    rep = origin_limit_check(MAIN, 1e-3)
    assert rep.passed
    assert rep.limit_a_order == approx(2.0, abs=0.2)
    assert rep.limit_b_order == approx(1.0, abs=0.2)
    assert rep.limit_a_gap <= 1e-8
    assert rep.limit_c_gap <= 1e-6
    A = 1.0 * (4.0 * math.pi * 0.1 * 1e-3) ** 1.5
    assert rep.limit_a_target == approx(1.0 / (1e-3 * (1.0 + A)), rel=1e-12)


def test_origin_limit_check_rejects_other_families():
    with pytest.raises(ValueError):
        origin_limit_check(SS, 1e-3)
    with pytest.raises(ValueError):
        origin_limit_check(main_example(Params(3, 0.1, a=0.0)), 1e-3)
