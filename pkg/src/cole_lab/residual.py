"""PDE residual checks: does each family actually solve the system?

Radial form:      u_t + u u_r = mu (u_rr + (n-1)(u_r/r - u/r^2))
Divergence form:  u_t + ((1/2)u^2)_r = mu (u_r + ((n-1)/r) u)_r

The two are algebraically identical for smooth u; evaluating both with
different floating-point groupings and comparing to rounding is a cheap
self-check on the derivative evaluators.  Residuals are reported relative
to the largest single term magnitude at each point, since the terms
themselves reach 1e6 and beyond as t -> 0 and absolute tolerances would be
meaningless there.

The Cartesian pass assembles the full vector system from
cartesian_components and includes the origin for origin-regular families,
where the correct limits are value 0, Jacobian g0(t) I, second partials 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .solutions import SolutionFamily, fd_derivative

__all__ = [
    "Grid1D",
    "ResidualReport",
    "OriginLimitReport",
    "residual_pointwise",
    "radial_residual",
    "divergence_form_residual",
    "cartesian_residual",
    "origin_limit_check",
]


@dataclass(frozen=True)
class Grid1D:
    """Evaluation grid: nr+1 radii from r_min to r_max, at the given times.

    spacing "uniform" or "log" (log requires r_min > 0).  Singular families
    need r_min > 0; the conventional inner cutoff is 1e-3 sqrt(4 mu t).
    """

    r_min: float
    r_max: float
    nr: int
    t_values: tuple
    spacing: str = "uniform"

    def __post_init__(self):
        if self.nr < 16:
            raise ValueError("Grid1D.nr must be >= 16")
        if not (0.0 <= self.r_min < self.r_max):
            raise ValueError("need 0 <= r_min < r_max")
        if self.spacing not in ("uniform", "log"):
            raise ValueError("spacing must be 'uniform' or 'log'")
        if self.spacing == "log" and self.r_min <= 0.0:
            raise ValueError("log spacing requires r_min > 0")
        if not self.t_values or any(t <= 0.0 for t in self.t_values):
            raise ValueError("t_values must be positive and nonempty")

    def radii(self) -> np.ndarray:
        if self.spacing == "uniform":
            return np.linspace(self.r_min, self.r_max, self.nr + 1)
        return np.geomspace(self.r_min, self.r_max, self.nr + 1)


@dataclass(frozen=True)
class ResidualReport:
    family: str
    form: str                  # "radial" | "divergence" | "cartesian"
    derivative_source: str     # "analytic" | "finite-difference"
    max_abs_scaled: float
    l2_scaled: float
    worst_t: float
    worst_r: float
    n_points: int


def _scaled(s: SolutionFamily, t: float, r: np.ndarray, form: str,
            u, ur, urr, ut):
    n, mu = s.params.n, s.params.mu
    if form == "radial":
        R = ut + u * ur - mu * (urr + (n - 1.0) * (ur / r - u / (r * r)))
    elif form == "divergence":
        R = ut + u * ur - mu * urr - mu * (n - 1.0) * ((ur * r - u) / (r * r))
    else:
        raise ValueError(f"unknown form {form!r}")
    scale = np.maximum.reduce([
        np.abs(ut), np.abs(u * ur), mu * np.abs(urr),
        mu * (n - 1.0) * np.abs(ur / r), mu * (n - 1.0) * np.abs(u) / (r * r),
    ])
    scale = np.maximum(scale, 1e-300)
    return R / scale


def residual_pointwise(s: SolutionFamily, t: float, r, form: str = "radial",
                       derivative_source: str = "analytic",
                       h_r: Optional[float] = None,
                       h_t: Optional[float] = None) -> np.ndarray:
    """Scaled residual at radii r (r > 0) for one time slice."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if derivative_source == "analytic":
        u, ur, urr, ut = s.u(t, r), s.u_r(t, r), s.u_rr(t, r), s.u_t(t, r)
    elif derivative_source == "finite-difference":
        if h_r is None or h_t is None:
            raise ValueError("finite-difference residual needs h_r and h_t")
        u = s.u(t, r)
        ur = np.array([fd_derivative(lambda x: s.u(t, x), ri, h_r, 1) for ri in r])
        urr = np.array([fd_derivative(lambda x: s.u(t, x), ri, h_r, 2) for ri in r])
        ut = np.array([fd_derivative(lambda tau: s.u(tau, ri), t, h_t, 1) for ri in r])
    else:
        raise ValueError(f"unknown derivative source {derivative_source!r}")
    return _scaled(s, t, r, form, u, ur, urr, ut)


def _run_grid(s: SolutionFamily, g: Grid1D, form: str,
              derivative_source: str) -> ResidualReport:
    worst = -1.0
    worst_t = worst_r = math.nan
    sq_sum = 0.0
    count = 0
    for t in g.t_values:
        r = g.radii()
        r = r[r > 0.0]  # the origin is covered by the Cartesian pass
        if derivative_source == "finite-difference":
            # step from the grid itself; shrink the stencil footprint away
            # from the left domain edge
            h = float(np.min(np.diff(g.radii())))
            keep = r - 2.0 * h > 0.0
            r = r[keep]
            vals = residual_pointwise(s, t, r, form, derivative_source,
                                      h_r=h, h_t=t * h / g.r_max)
        else:
            vals = residual_pointwise(s, t, r, form, derivative_source)
        a = np.abs(vals)
        i = int(np.argmax(a))
        if a[i] > worst:
            worst, worst_t, worst_r = float(a[i]), float(t), float(r[i])
        sq_sum += float(np.sum(a * a))
        count += len(r)
    return ResidualReport(
        family=s.label(), form=form, derivative_source=derivative_source,
        max_abs_scaled=worst, l2_scaled=math.sqrt(sq_sum / max(count, 1)),
        worst_t=worst_t, worst_r=worst_r, n_points=count)


def radial_residual(s: SolutionFamily, g: Grid1D,
                    derivative_source: str = "analytic") -> ResidualReport:
    """Scaled residual of the radial system over the grid.

    derivative_source "analytic" uses the family's closed-form partials;
    "finite-difference" re-derives them from u alone with 5-point stencils
    whose step is the grid spacing, giving an independent second pass.
    """
    return _run_grid(s, g, "radial", derivative_source)


def divergence_form_residual(s: SolutionFamily, g: Grid1D,
                             derivative_source: str = "analytic") -> ResidualReport:
    """Residual of the divergence (conservation) form; algebraically the
    same PDE, evaluated with a different grouping so agreement with
    radial_residual is a rounding-level consistency check."""
    return _run_grid(s, g, "divergence", derivative_source)


def cartesian_residual(s: SolutionFamily, t: float,
                       points: Sequence) -> ResidualReport:
    """Residual of u_t + (Du)u - mu Lap(u) = 0 at the given R^n points.

    Uses the Cartesian assembly (value, Jacobian, second partials); the
    origin is admitted for origin-regular families, where every term
    vanishes by the closed-form limits.
    """
    from .solutions import cartesian_components

    n, mu = s.params.n, s.params.mu
    worst = -1.0
    worst_r = math.nan
    sq = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        value, jac, second = cartesian_components(s, t, x)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            ut_vec = np.zeros(n)
        else:
            ut_vec = float(s.u_t(t, r)) / r * x
        advect = jac @ value
        lap = np.einsum("ijj->i", second)
        res = ut_vec + advect - mu * lap
        scale = max(float(np.max(np.abs(ut_vec))), float(np.max(np.abs(advect))),
                    mu * float(np.max(np.abs(lap))), 1e-300)
        val = float(np.max(np.abs(res))) / scale
        sq += val * val
        if val > worst:
            worst, worst_r = val, r
    return ResidualReport(
        family=s.label(), form="cartesian", derivative_source="analytic",
        max_abs_scaled=worst, l2_scaled=math.sqrt(sq / max(len(points), 1)),
        worst_t=float(t), worst_r=worst_r, n_points=len(points))


@dataclass(frozen=True)
class OriginLimitReport:
    """Origin behavior of the main example at fixed t_bar.

    (a) u/r -> 1/(t(1+A)) at order r^2, A = a (4 pi mu t)^(n/2)
    (b) (u/r)_r -> 0 at order r
    (c) ((u/r)_r/r)_r/r -> A(A-1)/(4 mu^2 t^3 (1+A)^3)
    """

    t_bar: float
    radii: tuple
    limit_a_target: float
    limit_a_order: float
    limit_a_gap: float        # |g(smallest r) - target| / target
    limit_b_order: float
    limit_c_target: float
    limit_c_gap: float
    passed: bool = field(default=True)


def _loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    good = y > 0.0
    lx, ly = np.log(x[good]), np.log(y[good])
    return float(np.polyfit(lx, ly, 1)[0])


def origin_limit_check(s: SolutionFamily, t_bar: float,
                       radii: Optional[Sequence[float]] = None) -> OriginLimitReport:
    """Quantify origin regularity of the main example: measured limits and
    observed convergence orders over a dyadic radius sequence (default
    r_k = 2^-k sqrt(4 mu t_bar), k = 4..14)."""
    if s.kind != "MainExample" or s.params.a <= 0.0:
        raise ValueError("origin_limit_check applies to MainExample with a > 0")
    n, mu, a = s.params.n, s.params.mu, s.params.a
    t_bar = float(t_bar)
    if radii is None:
        base = math.sqrt(4.0 * mu * t_bar)
        radii = [base * 2.0 ** (-k) for k in range(4, 15)]
    r = np.asarray(sorted(radii, reverse=True), dtype=float)

    A = a * (4.0 * math.pi * mu * t_bar) ** (0.5 * n)
    target_a = 1.0 / (t_bar * (1.0 + A))
    target_c = A * (A - 1.0) / (4.0 * mu * mu * t_bar ** 3 * (1.0 + A) ** 3)

    g_vals = np.asarray(s.g(t_bar, r))
    gap_a = np.abs(g_vals - target_a)
    order_a = _loglog_slope(r, gap_a)
    rel_a = float(gap_a[-1] / abs(target_a))

    gr_vals = np.abs(np.asarray(s.g_r(t_bar, r)))
    order_b = _loglog_slope(r, gr_vals)

    w_small = float(np.asarray(s.W(t_bar, r))[-1])
    gap_c = abs(w_small - target_c) / max(abs(target_c), 1e-300)

    passed = (abs(order_a - 2.0) <= 0.2 and abs(order_b - 1.0) <= 0.2
              and rel_a <= 1e-8 and gap_c <= 1e-6)
    return OriginLimitReport(
        t_bar=t_bar, radii=tuple(float(x) for x in r),
        limit_a_target=target_a, limit_a_order=order_a, limit_a_gap=rel_a,
        limit_b_order=order_b, limit_c_target=target_c, limit_c_gap=gap_c,
        passed=passed)
