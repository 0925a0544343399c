"""Radial finite-difference marcher for u_t + u u_r = mu (u_rr + (n-1)(u_r/r
- u/r^2)), used as an independent oracle against the closed forms.

Scope is deliberately narrow: short horizons (t1 <= 5 t0), moderate grids
(nr <= 8192), Dirichlet data on both ends.  The solver confirms the families
by manufactured-solution convergence; it does not (and cannot) probe
non-uniqueness, since its boundary data selects one solution.

Schemes: "cn-upwind" (Crank-Nicolson diffusion + explicit first-order upwind
advection, default), "cn-central" (second-order advection, used by the
convergence study), "rk2" (fully explicit Heun with upwind advection,
stability-limited cross-check of the implicit solver).  Time steps follow
dt ~ cfl h^2 / mu, so with cn-central the temporal error O(dt^2) = O(h^4)
stays below the O(h^2) spatial error and h-halving shows clean ratio-4
behavior.

Origin handling: for origin-regular data the r=0 node carries u = 0 exactly
(the radial component of a continuous vector field vanishes at 0), so the
singular (n-1)(u_r/r - u/r^2) terms are never evaluated there; their
finiteness as r -> 0 is established separately by the origin-limit checks in
the residual module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.linalg import solve_banded

from .solutions import SolutionFamily

__all__ = [
    "StabilityError",
    "SolverConfig",
    "SolverRun",
    "BumpProfile",
    "MinPrincipleReport",
    "ConvergenceReport",
    "march",
    "convergence_study",
    "min_principle_experiment",
]

_SCHEMES = ("cn-upwind", "cn-central", "rk2")


class StabilityError(RuntimeError):
    """Runtime CFL violation or NaN during the march."""


@dataclass(frozen=True)
class SolverConfig:
    n: int
    mu: float
    r_max: float
    nr: int
    t0: float
    t1: float
    cfl: float = 0.25
    scheme: str = "cn-upwind"
    left_boundary: str = "dirichlet-zero"   # or "dirichlet-exact" with r_min > 0
    r_min: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not (self.mu > 0.0):
            raise ValueError("mu must be positive")
        if not (0.0 < self.t0 < self.t1):
            raise ValueError("need t1 > t0 > 0")
        if self.t1 > 5.0 * self.t0:
            raise ValueError("oracle horizon limited to t1 <= 5 t0")
        if not (16 <= self.nr <= 8192):
            raise ValueError("nr must be in [16, 8192]")
        if not (0.0 <= self.r_min < self.r_max):
            raise ValueError("need 0 <= r_min < r_max")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError("cfl must be in (0, 1]")
        if self.scheme == "rk2" and self.cfl > 0.5:
            # explicit diffusion number 4 mu dt / h^2 = 4 cfl must stay <= 2
            raise ValueError("rk2 requires cfl <= 0.5")
        if self.left_boundary == "dirichlet-zero":
            if self.r_min != 0.0:
                raise ValueError("dirichlet-zero left boundary needs r_min = 0")
        elif self.left_boundary == "dirichlet-exact":
            if not self.r_min > 0.0:
                raise ValueError("dirichlet-exact left boundary needs r_min > 0")
        else:
            raise ValueError("left_boundary must be dirichlet-zero or dirichlet-exact")

    def radii(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.nr + 1)

    def step_size(self) -> tuple:
        h = (self.r_max - self.r_min) / self.nr
        target = self.cfl * h * h / self.mu
        n_steps = max(1, math.ceil((self.t1 - self.t0) / target))
        return (self.t1 - self.t0) / n_steps, n_steps


@dataclass(frozen=True)
class SolverRun:
    config: SolverConfig
    radii: np.ndarray
    final: np.ndarray
    n_steps: int
    dt: float
    max_history: np.ndarray   # per-step max over the full grid, length n_steps
    min_history: np.ndarray


@dataclass(frozen=True)
class BumpProfile:
    """Downward Gaussian bump -depth (phi - ell) where phi is a Gaussian at
    (center, width) and ell the straight line through phi's endpoint values,
    so the profile vanishes exactly at r_min and r_max."""

    depth: float = 1.0
    center: float = 1.0
    width: float = 0.2

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        phi = np.exp(-(((r - self.center) / self.width) ** 2))
        lam = (r - r[0]) / (r[-1] - r[0])
        ell = phi[0] * (1.0 - lam) + phi[-1] * lam
        return -self.depth * (phi - ell)


@dataclass(frozen=True)
class MinPrincipleReport:
    min_history: np.ndarray
    initial_min: float
    eps_h: float
    max_drop: float            # worst single-step decrease of the grid minimum
    rhs_positive_fraction: float
    passed: bool


@dataclass(frozen=True)
class ConvergenceReport:
    scheme: str
    nr_values: tuple
    errors: tuple              # max-norm error vs the exact family at t1
    ratios: tuple              # errors[i] / errors[i+1] under h-halving
    observed_orders: tuple     # log2 of the ratios


class _Stepper:
    """One configured time step; shared by march and the replay in
    min_principle_experiment so both advance with identical arithmetic."""

    def __init__(self, cfg: SolverConfig, bl, br):
        self.cfg = cfg
        self.bl = bl
        self.br = br
        r = cfg.radii()
        self.h = r[1] - r[0]
        ri = r[1:-1]
        mu, n = cfg.mu, cfg.n
        self.lo = mu * (1.0 / self.h**2 - (n - 1) / (2.0 * self.h * ri))
        self.di = mu * (-2.0 / self.h**2 - (n - 1) / ri**2)
        self.up = mu * (1.0 / self.h**2 + (n - 1) / (2.0 * self.h * ri))
        self.dt, self.n_steps = cfg.step_size()
        if cfg.scheme != "rk2":
            ab = np.zeros((3, cfg.nr - 1))
            ab[0, 1:] = -0.5 * self.dt * self.up[:-1]
            ab[1, :] = 1.0 - 0.5 * self.dt * self.di
            ab[2, :-1] = -0.5 * self.dt * self.lo[1:]
            self.ab = ab

    def apply_operator(self, u: np.ndarray) -> np.ndarray:
        return self.lo * u[:-2] + self.di * u[1:-1] + self.up * u[2:]

    def advection(self, u: np.ndarray) -> np.ndarray:
        if self.cfg.scheme == "cn-central":
            ur = (u[2:] - u[:-2]) / (2.0 * self.h)
        else:
            back = (u[1:-1] - u[:-2]) / self.h
            fwd = (u[2:] - u[1:-1]) / self.h
            ur = np.where(u[1:-1] >= 0.0, back, fwd)
        return u[1:-1] * ur

    def step(self, u: np.ndarray, t_new: float) -> np.ndarray:
        if self.cfg.scheme == "rk2":
            k1 = self.apply_operator(u) - self.advection(u)
            mid = np.concatenate(([self.bl(t_new)], u[1:-1] + self.dt * k1,
                                  [self.br(t_new)]))
            k2 = self.apply_operator(mid) - self.advection(mid)
            interior = u[1:-1] + 0.5 * self.dt * (k1 + k2)
        else:
            rhs = (u[1:-1] + 0.5 * self.dt * self.apply_operator(u)
                   - self.dt * self.advection(u))
            rhs[0] += 0.5 * self.dt * self.lo[0] * self.bl(t_new)
            rhs[-1] += 0.5 * self.dt * self.up[-1] * self.br(t_new)
            interior = solve_banded((1, 1), self.ab, rhs)
        return np.concatenate(([self.bl(t_new)], interior, [self.br(t_new)]))


def _initial_and_boundaries(cfg: SolverConfig, initial, r: np.ndarray):
    if isinstance(initial, SolutionFamily):
        if initial.params.n != cfg.n or initial.params.mu != cfg.mu:
            raise ValueError("family (n, mu) disagree with the solver config")
        if r[0] == 0.0 and not initial.origin_regular:
            raise ValueError("singular family needs r_min > 0")
        u0 = np.asarray(initial.u(cfg.t0, r), dtype=float)
        if cfg.left_boundary == "dirichlet-zero":
            bl = lambda t: 0.0
        else:
            bl = lambda t: float(initial.u(t, r[0]))
        br = lambda t: float(initial.u(t, r[-1]))
        return u0, bl, br
    u0 = np.asarray(initial, dtype=float).copy()
    if u0.shape != r.shape:
        raise ValueError(f"initial profile must have {r.size} nodes")
    left, right = float(u0[0]), float(u0[-1])
    return u0, (lambda t: left), (lambda t: right)


def march(cfg: SolverConfig, initial: Union[SolutionFamily, np.ndarray]) -> SolverRun:
    """March the radial equation from t0 to t1 and record extrema history.

    `initial` is either a SolutionFamily (sampled at t0, Dirichlet data taken
    from the family at both ends) or a profile array on cfg.radii() (endpoint
    values held fixed in time).  Raises StabilityError on NaN or when the
    advective CFL number dt max|u| / h exceeds 1 mid-run.
    """
    r = cfg.radii()
    u0, bl, br = _initial_and_boundaries(cfg, initial, r)
    if not np.all(np.isfinite(u0)):
        raise ValueError("initial profile contains non-finite values")
    stepper = _Stepper(cfg, bl, br)
    dt, n_steps = stepper.dt, stepper.n_steps

    u = u0.copy()
    max_hist = np.empty(n_steps)
    min_hist = np.empty(n_steps)
    for m in range(n_steps):
        amp = float(np.max(np.abs(u)))
        if dt * amp / stepper.h > 1.0:
            raise StabilityError(
                f"advective CFL {dt * amp / stepper.h:.3g} > 1 at step {m}")
        u = stepper.step(u, cfg.t0 + (m + 1) * dt)
        if not np.all(np.isfinite(u)):
            raise StabilityError(f"non-finite value at step {m + 1}")
        max_hist[m] = u.max()
        min_hist[m] = u.min()
    return SolverRun(config=cfg, radii=r, final=u, n_steps=n_steps, dt=dt,
                     max_history=max_hist, min_history=min_hist)


def convergence_study(s: SolutionFamily, cfg: SolverConfig,
                      nr_values: Sequence[int]) -> ConvergenceReport:
    """Manufactured-solution test: march s from t0, compare to s at t1 in
    max norm for each nr, and report h-halving error ratios.

    cn-central shows ratios near 4 (order 2); cn-upwind and rk2 carry the
    first-order upwind advection error, ratios near 2."""
    errors = []
    for nr in nr_values:
        cfg_nr = SolverConfig(n=cfg.n, mu=cfg.mu, r_max=cfg.r_max, nr=int(nr),
                              t0=cfg.t0, t1=cfg.t1, cfl=cfg.cfl,
                              scheme=cfg.scheme, left_boundary=cfg.left_boundary,
                              r_min=cfg.r_min)
        run = march(cfg_nr, s)
        exact = np.asarray(s.u(cfg.t1, run.radii))
        errors.append(float(np.max(np.abs(run.final - exact))))
    ratios = tuple(errors[i] / errors[i + 1] for i in range(len(errors) - 1))
    orders = tuple(math.log2(max(rho, 1e-300)) for rho in ratios)
    return ConvergenceReport(scheme=cfg.scheme,
                             nr_values=tuple(int(v) for v in nr_values),
                             errors=tuple(errors), ratios=ratios,
                             observed_orders=orders)


def min_principle_experiment(cfg: SolverConfig,
                             bump: BumpProfile = BumpProfile()) -> MinPrincipleReport:
    """Evolve a negative bump and check the discrete minimum never decreases
    beyond eps_h = h^2 max|D^2 u0|, and that at the discrete minimum (while
    it is genuinely negative) the full right-hand side mu(u_rr +
    (n-1)(u_r/r - u/r^2)) is positive, which is what forbids the decrease.
    """
    r = cfg.radii()
    h = r[1] - r[0]
    u0 = bump.evaluate(r)
    d2 = np.abs(u0[:-2] - 2.0 * u0[1:-1] + u0[2:]) / h**2
    eps_h = h * h * float(d2.max()) if d2.size else 0.0
    left, right = float(u0[0]), float(u0[-1])
    stepper = _Stepper(cfg, lambda t: left, lambda t: right)

    u = u0.copy()
    min_hist = np.empty(stepper.n_steps)
    positives = total = 0
    threshold = -10.0 * eps_h
    for m in range(stepper.n_steps):
        i = int(np.argmin(u))
        if 0 < i < len(r) - 1 and u[i] < threshold:
            rhs = (stepper.lo[i - 1] * u[i - 1] + stepper.di[i - 1] * u[i]
                   + stepper.up[i - 1] * u[i + 1]
                   - u[i] * (u[i + 1] - u[i - 1]) / (2.0 * h))
            total += 1
            if rhs > 0.0:
                positives += 1
        u = stepper.step(u, cfg.t0 + (m + 1) * stepper.dt)
        if not np.all(np.isfinite(u)):
            raise StabilityError(f"non-finite value at step {m + 1}")
        min_hist[m] = u.min()

    mins = np.concatenate(([u0.min()], min_hist))
    drops = np.diff(mins)
    max_drop = float(-drops.min()) if drops.size else 0.0
    non_dec = max_drop <= eps_h
    frac = positives / total if total else 1.0
    return MinPrincipleReport(min_history=min_hist,
                              initial_min=float(u0.min()), eps_h=eps_h,
                              max_drop=max_drop, rhs_positive_fraction=frac,
                              passed=bool(non_dec and frac == 1.0))
