"""Grid-refinement study for the finite-difference marcher.

Marches two exact families on nested grids and reports max-norm errors at
the final time with observed convergence orders: Crank-Nicolson with
central advection should show order 2, with upwind advection order 1.

Usage: python3 scripts/convergence_study.py [--nr 64 128 256 512]
"""

import argparse
import sys

from cole_lab.pdesolver import SolverConfig, convergence_study
from cole_lab.solutions import Params, main_example, nonstationary_erf

CASES = [
    ("interior layer, central", main_example(Params(n=3, mu=0.1, a=1.0)),
     dict(scheme="cn-central"), 2.0),
    ("interior layer, upwind", main_example(Params(n=3, mu=0.1, a=1.0)),
     dict(scheme="cn-upwind"), 1.0),
    ("erf flow, central", nonstationary_erf(0.1),
     dict(scheme="cn-central"), 2.0),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nr", type=int, nargs="+", default=[64, 128, 256, 512])
    args = ap.parse_args(argv)

    ok = True
    for label, fam, overrides, want in CASES:
        cfg = SolverConfig(n=3, mu=0.1, r_max=0.3, nr=args.nr[0],
                           t0=1e-3, t1=2e-3, **overrides)
        rep = convergence_study(fam, cfg, args.nr)
        orders = ", ".join(f"{o:.3f}" for o in rep.observed_orders)
        errors = ", ".join(f"{e:.3e}" for e in rep.errors)
        good = rep.observed_orders[-1] > want - 0.5
        ok = ok and good
        print(f"{label} ({rep.scheme})")
        print(f"  nr     = {list(rep.nr_values)}")
        print(f"  errors = [{errors}]")
        print(f"  orders = [{orders}]  target {want:g}  "
              f"{'ok' if good else 'LOW'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
