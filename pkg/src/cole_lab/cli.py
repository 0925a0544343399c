"""Command-line front end: family evaluation, norm sweeps, decay fits,
residual checks, solver runs, and the full verification suite.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical non-convergence or instability.  Output is deterministic for a
fixed command line: fixed seeds, fixed grids, no wall-clock content.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from . import acceptance
from . import norms as N
from . import pdesolver as P
from . import residual as R
from .quadrature import NonConvergenceError
from .solutions import (EvaluationError, Params, SolutionFamily, main_example,
                        nonstationary_erf, self_similar, stationary)

__all__ = ["main", "build_parser"]

_FAMILIES = ("MainExample", "SelfSimilar", "Stationary", "NonStationaryErf")


class ConfigError(ValueError):
    """Bad flags, config keys, or parameter domains."""


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _parse_t_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, k = spec.split(":")
        lo, hi, k = float(lo), float(hi), int(k)
    except ValueError as exc:
        raise ConfigError(f"bad t-grid spec {spec!r}, want lo:hi:k") from exc
    if not (lo > 0.0 and hi > 0.0 and k >= 2):
        raise ConfigError("t-grid needs positive endpoints and k >= 2")
    return np.geomspace(lo, hi, k)


def _parse_r_grid(spec: str):
    try:
        lo, hi, k = spec.split(":")
        return float(lo), float(hi), int(k)
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}, want rmin:rmax:nr") from exc


def _parse_p_list(spec: str):
    try:
        ps = tuple(float(x) for x in spec.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad p list {spec!r}") from exc
    if not ps or any(p < 1.0 for p in ps):
        raise ConfigError("p values must be >= 1")
    return ps


def _build_family(args) -> SolutionFamily:
    kind = args.family
    if kind not in _FAMILIES:
        raise ConfigError(f"unknown family {kind!r}, choose from {_FAMILIES}")
    try:
        if kind == "NonStationaryErf":
            if args.n != 3:
                raise ConfigError("NonStationaryErf is defined for n=3 only")
            return nonstationary_erf(args.mu)
        params = Params(n=args.n, mu=args.mu, a=args.a, C=args.C)
        if kind == "MainExample":
            return main_example(params)
        if kind == "SelfSimilar":
            return self_similar(params)
        return stationary(params)
    except (ValueError, EvaluationError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _apply_config_file(args, parser_dests):
    if not args.config:
        return
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in parser_dests:
            raise ConfigError(f"unknown config key {key!r}")
        # flags win: only fill slots the command line left at None
        if getattr(args, dest, None) is None:
            setattr(args, dest, value)


def _fill_defaults(args):
    defaults = {"n": 3, "mu": 0.1, "a": 1.0, "C": 0.0, "format": "csv",
                "p": "2", "kind": "lp", "t_grid": "1e-2:1e-8:13",
                "scheme": "cn-upwind", "source": "analytic", "form": "radial",
                "nr": 256, "r_max": 0.3, "t0": 1e-3, "t1": 2e-3, "cfl": 0.25,
                "r_min": 0.0, "grid": "1e-4:0.1:200"}
    for key, value in defaults.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)
    for key in ("n", "nr"):
        if hasattr(args, key):
            setattr(args, key, int(getattr(args, key)))
    for key in ("mu", "a", "C", "r_max", "t0", "t1", "cfl", "r_min"):
        if hasattr(args, key):
            setattr(args, key, float(getattr(args, key)))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _emit(args, meta: str, header, rows, json_obj):
    """Write CSV (metadata comment + header + rows) or a JSON mirror."""
    if args.format == "json":
        text = json.dumps(_json_safe(json_obj), sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + meta + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # downstream consumer (head, etc.) closed the pipe; not an error
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())


def _meta(args, subcommand: str, extra: str) -> str:
    return (f"cole-lab {__version__} | {subcommand} | {extra} | "
            f"format={args.format}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

_FIGURES = {
    # family-builder, (r_lo, r_hi), (t_lo, t_hi), t floor flag for t=0 rows
    1: (lambda: main_example(Params(n=3, mu=0.1, a=1.0)), (1e-4, 0.1),
        (2e-5, 1e-3), False),
    2: (lambda: self_similar(Params(n=3, mu=0.005, a=1.0)), (5e-5, 7e-4),
        (0.0, 5e-5), True),
    3: (lambda: nonstationary_erf(0.01), (1e-3, 0.3), (1e-3, 0.2), False),
}


def cmd_figure(args) -> int:
    which = int(args.which)
    if which not in _FIGURES:
        raise ConfigError("figure number must be 1, 2, or 3")
    build, (r_lo, r_hi), (t_lo, t_hi), has_floor = _FIGURES[which]
    fam = build()
    rs = np.linspace(r_lo, r_hi, 200)
    ts = np.linspace(t_lo, t_hi, 200)
    rows = []
    for t in ts:
        flag = ""
        t_eval = float(t)
        if t_eval == 0.0:
            t_eval, flag = 1e-9, "t-floor"   # family undefined at t = 0
        u = np.asarray(fam.u(t_eval, rs))
        rows.extend([float(t), float(r), float(v), 0.0, flag]
                    for r, v in zip(rs, u))
    meta = _meta(args, f"figure {which}",
                 f"family={fam.label()} | grid=200x200 | "
                 f"r=[{r_lo:g},{r_hi:g}] t=[{t_lo:g},{t_hi:g}]")
    json_obj = {"figure": which, "family": fam.label(), "version": __version__,
                "rows": [{"t": a, "r": b, "value": c, "error_estimate": d,
                          "flags": e} for a, b, c, d, e in rows]}
    _emit(args, meta, ["t", "r", "value", "error_estimate", "flags"], rows,
          json_obj)
    return 0


def cmd_norms(args) -> int:
    fam = _build_family(args)
    ps = _parse_p_list(args.p)
    ts = _parse_t_grid(args.t_grid)
    kind = args.kind
    if kind not in ("lp", "grad_lp", "hess_bound_lp", "linf", "distance"):
        raise ConfigError(f"unknown norm kind {args.kind!r}")
    reports = []
    for p in ps:
        if kind == "distance":
            if fam.kind != "NonStationaryErf":
                raise ConfigError(
                    "distance norms are defined for the NonStationaryErf family")
            ref = stationary(Params(n=3, mu=args.mu, C=0.0))
            spec = N.NormSpec("lp_distance", p=p, n=args.n, reference=ref)
        else:
            spec = N.NormSpec(kind, p=p, n=args.n)
        reports.append(N.norm_sweep(fam, spec, ts))
    header = ["t"]
    for p in ps:
        header += [f"value[p={p:g}]", f"error[p={p:g}]", f"flags[p={p:g}]"]
    rows = []
    for i, t in enumerate(ts):
        row = [float(t)]
        for rep in reports:
            row += [rep.values[i], rep.quad_errors[i], rep.flags[i]]
        rows.append(row)
    meta = _meta(args, "norms", f"family={fam.label()} | kind={kind} | "
                                f"p={args.p} | t-grid={args.t_grid}")
    json_obj = {"family": fam.label(), "kind": kind, "version": __version__,
                "reports": [{"p": p, "t_grid": list(rep.t_grid),
                             "values": list(rep.values),
                             "quad_errors": list(rep.quad_errors),
                             "flags": list(rep.flags)}
                            for p, rep in zip(ps, reports)]}
    _emit(args, meta, header, rows, json_obj)
    return 0


def cmd_decay(args) -> int:
    fam = _build_family(args)
    ps = _parse_p_list(args.p)
    ts = _parse_t_grid(args.t_grid)
    kind = args.kind
    rows = []
    fits = []
    for p in ps:
        if kind == "distance":
            ref = stationary(Params(n=3, mu=args.mu, C=0.0))
            spec = N.NormSpec("lp_distance", p=p, n=args.n, reference=ref)
        else:
            spec = N.NormSpec(kind, p=p, n=args.n)
        try:
            fit = N.decay_fit(N.norm_sweep(fam, spec, ts))
        except N.DegenerateFitError as exc:
            return _fail(f"decay fit failed for p={p:g}: {exc}")
        fits.append(fit)
        rows.append([p, fit.slope, fit.intercept, fit.max_log_residual,
                     fit.n_points])
    meta = _meta(args, "decay", f"family={fam.label()} | kind={kind} | "
                                f"p={args.p} | t-grid={args.t_grid}")
    json_obj = {"family": fam.label(), "kind": kind, "version": __version__,
                "fits": [{"p": p, "slope": f.slope, "intercept": f.intercept,
                          "max_log_residual": f.max_log_residual,
                          "n_points": f.n_points, "t_grid": list(f.t_grid)}
                         for p, f in zip(ps, fits)]}
    _emit(args, meta, ["p", "slope", "intercept", "max_log_residual",
                       "n_points"], rows, json_obj)
    return 0


def cmd_residual(args) -> int:
    fam = _build_family(args)
    r_lo, r_hi, nr = _parse_r_grid(args.grid)
    ts = _parse_t_grid(args.t_grid)
    try:
        grid = R.Grid1D(r_lo, r_hi, nr, tuple(float(t) for t in ts))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    form = args.form
    if form not in ("radial", "divergence"):
        raise ConfigError("form must be radial or divergence")
    rows = []
    reps = []
    for source in ("analytic", "finite-difference"):
        if form == "radial":
            rep = R.radial_residual(fam, grid, derivative_source=source)
        else:
            rep = R.divergence_form_residual(fam, grid, derivative_source=source)
        reps.append(rep)
        rows.append([form, source, rep.max_abs_scaled, rep.l2_scaled,
                     rep.worst_t, rep.worst_r, rep.n_points])
    meta = _meta(args, "residual", f"family={fam.label()} | form={form} | "
                                   f"grid={args.grid} | t-grid={args.t_grid}")
    json_obj = {"family": fam.label(), "form": form, "version": __version__,
                "reports": [{"derivative_source": rep.derivative_source,
                             "max_abs_scaled": rep.max_abs_scaled,
                             "l2_scaled": rep.l2_scaled,
                             "worst_t": rep.worst_t, "worst_r": rep.worst_r,
                             "n_points": rep.n_points} for rep in reps]}
    _emit(args, meta, ["form", "source", "max_abs_scaled", "l2_scaled",
                       "worst_t", "worst_r", "n_points"], rows, json_obj)
    return 0


def cmd_solve(args) -> int:
    fam = _build_family(args)
    try:
        cfg = P.SolverConfig(n=args.n, mu=args.mu, r_max=args.r_max,
                             nr=args.nr, t0=args.t0, t1=args.t1, cfl=args.cfl,
                             scheme=args.scheme,
                             left_boundary=("dirichlet-zero" if args.r_min == 0.0
                                            else "dirichlet-exact"),
                             r_min=args.r_min)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        run = P.march(cfg, fam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    exact = np.asarray(fam.u(cfg.t1, run.radii))
    err = float(np.max(np.abs(run.final - exact)))
    rows = [[cfg.scheme, cfg.nr, run.n_steps, run.dt,
             float(run.final.max()), float(run.final.min()), err]]
    meta = _meta(args, "solve", f"family={fam.label()} | scheme={cfg.scheme} | "
                                f"nr={cfg.nr} | t=[{cfg.t0:g},{cfg.t1:g}]")
    json_obj = {"family": fam.label(), "version": __version__,
                "scheme": cfg.scheme, "nr": cfg.nr, "n_steps": run.n_steps,
                "dt": run.dt, "final_max": float(run.final.max()),
                "final_min": float(run.final.min()),
                "max_error_vs_exact": err,
                "max_history": list(run.max_history),
                "min_history": list(run.min_history)}
    _emit(args, meta, ["scheme", "nr", "n_steps", "dt", "final_max",
                       "final_min", "max_error_vs_exact"], rows, json_obj)
    return 0


def cmd_verify_all(args) -> int:
    report = acceptance.run_all()
    for res in report.results:
        print(res.summary())
        for line in res.lines:
            print(line)
    print("verify-all:", "PASS" if report.all_passed else "FAIL")
    if args.out:
        rows = [[r.index, "PASS" if r.passed else "FAIL", r.title]
                for r in report.results]
        json_obj = {"version": __version__, "all_passed": report.all_passed,
                    "criteria": [{"index": r.index, "title": r.title,
                                  "passed": r.passed, "lines": list(r.lines)}
                                 for r in report.results]}
        meta = _meta(args, "verify-all", f"all_passed={report.all_passed}")
        _emit(args, meta, ["index", "status", "title"], rows, json_obj)
    return 0 if report.all_passed else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _fail(msg: str) -> int:
    print(f"cole-lab: {msg}", file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cole-lab",
        description="verification tools for explicit radial Burgers-system "
                    "solution families")
    parser.add_argument("--version", action="version",
                        version=f"cole-lab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, family=True):
        p.add_argument("--config", help="JSON config file; flags win on conflict")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        if family:
            p.add_argument("--family", default=None, choices=_FAMILIES)
            p.add_argument("--n", type=int, default=None)
            p.add_argument("--mu", type=float, default=None)
            p.add_argument("--a", type=float, default=None)
            p.add_argument("--C", type=float, default=None)

    p = sub.add_parser("figure", help="emit figure surface data (200x200 grid)")
    common(p, family=False)
    p.add_argument("--which", type=int, required=True, choices=[1, 2, 3])
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("norms", help="norm sweep over a t-grid")
    common(p)
    p.add_argument("--kind", default=None,
                   choices=["lp", "grad_lp", "hess_bound_lp", "linf", "distance"])
    p.add_argument("--p", default=None, help="comma-separated exponents")
    p.add_argument("--t-grid", dest="t_grid", default=None, help="lo:hi:k")
    p.set_defaults(fn=cmd_norms)

    p = sub.add_parser("decay", help="log-log decay fit of a norm sweep")
    common(p)
    p.add_argument("--kind", default=None,
                   choices=["lp", "grad_lp", "hess_bound_lp", "linf", "distance"])
    p.add_argument("--p", default=None)
    p.add_argument("--t-grid", dest="t_grid", default=None)
    p.set_defaults(fn=cmd_decay)

    p = sub.add_parser("residual", help="PDE residual report on a grid")
    common(p)
    p.add_argument("--grid", default=None, help="rmin:rmax:nr")
    p.add_argument("--t-grid", dest="t_grid", default=None)
    p.add_argument("--form", default=None, choices=["radial", "divergence"])
    p.set_defaults(fn=cmd_residual)

    p = sub.add_parser("solve", help="finite-difference oracle march")
    common(p)
    p.add_argument("--scheme", default=None,
                   choices=["cn-upwind", "cn-central", "rk2"])
    p.add_argument("--nr", type=int, default=None)
    p.add_argument("--r-max", dest="r_max", type=float, default=None)
    p.add_argument("--r-min", dest="r_min", type=float, default=None)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--cfl", type=float, default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    common(p, family=False)
    p.set_defaults(fn=cmd_verify_all)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        dests = set(vars(args))
        _apply_config_file(args, dests)
        _fill_defaults(args)
        return args.fn(args)
    except ConfigError as exc:
        print(f"cole-lab: config error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, P.StabilityError) as exc:
        print(f"cole-lab: numerical failure: {exc}", file=sys.stderr)
        return 3
    except N.DivergenceError as exc:
        print(f"cole-lab: divergent quantity: {exc}", file=sys.stderr)
        return 1
    except EvaluationError as exc:
        print(f"cole-lab: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
