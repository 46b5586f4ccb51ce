"""Regulariser sweep: L1-on-recurrent vs walk-series penalty.

For each task (module averaging, on-off averaging) and each family, trains
across a shared beta grid plus a beta=0 sanity point, selects beta on
validation MSE and compares test MSE, degradation at the largest beta, and
the even-hop magnitudes of each family's best run. This is the long one;
expect a few minutes single-core.
"""

import argparse
import sys

from pathweaver.cli import main


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default="runs/fig5", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    return p.parse_args(argv)


def forward(args):
    argv = ["fig5", "--out", args.out]
    if args.config is not None:
        argv += ["--config", args.config]
    for name in ("seed", "repeats", "jobs"):
        value = getattr(args, name)
        if value is not None:
            argv += [f"--{name}", str(value)]
    return main(argv)


if __name__ == "__main__":
    sys.exit(forward(parse_args(sys.argv[1:])))
