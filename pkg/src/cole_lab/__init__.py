"""Verification lab for explicit solution families of the radial Cole system.

The system is u_t + (u.grad)u = mu Laplace(u) on R^n, restricted to radial
vector fields u(t,x) = u(t,r) x/r.  The package evaluates several exact
families in numerically stable form, checks that they solve the equation,
measures their Lebesgue and Sobolev norms on supercritical ranges, and
exercises them against a finite difference solver.
"""

__version__ = "0.1.0"
