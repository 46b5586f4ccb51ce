"""Train repeats on the four mappable tasks and correlate the walk-series
map with the analytic optimum. Writes report.json, per-run records and the
mean/optimal map CSVs under --out."""

import argparse
import sys

from pathweaver.cli import main


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default="runs/fig3", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    return p.parse_args(argv)


def forward(args):
    argv = ["fig3", "--out", args.out]
    if args.config is not None:
        argv += ["--config", args.config]
    for name in ("seed", "repeats", "jobs"):
        value = getattr(args, name)
        if value is not None:
            argv += [f"--{name}", str(value)]
    return main(argv)


if __name__ == "__main__":
    sys.exit(forward(parse_args(sys.argv[1:])))
