"""Regenerate the three desk-scale figure grids as CSV files.

Each figure is a 200 x 200 (t, r) table of u(t, r) for one solution family:
figure 1 the interior-layer example, figure 2 the self-similar blowup
profile near t = 0, figure 3 the erf-based non-stationary flow.  Output is
byte-reproducible; rerunning overwrites in place.

Usage: python3 scripts/make_figures.py [--out-dir figures] [--format csv]
"""

import argparse
import pathlib
import sys

from cole_lab.cli import main as cli_main


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--format", default="csv", choices=["csv", "json"])
    args = ap.parse_args(argv)

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for which in (1, 2, 3):
        path = out_dir / f"figure{which}.{args.format}"
        rc = cli_main(["figure", "--which", str(which),
                       "--format", args.format, "--out", str(path)])
        if rc != 0:
            return rc
        print(f"figure {which}: wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
