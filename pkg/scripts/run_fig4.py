"""Hop-power routing analysis on the on-off averaging task.

Trains --repeats networks and reports, per hop count k, the block contrast
between signal-carrying and noise-carrying input modules. Even path lengths
line up with the task's alternating noise schedule, so the even-k contrasts
should dominate the odd ones.
"""

import argparse
import sys

from pathweaver.cli import main


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default="runs/fig4", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    return p.parse_args(argv)


def forward(args):
    argv = ["fig4", "--out", args.out]
    if args.config is not None:
        argv += ["--config", args.config]
    for name in ("seed", "repeats", "jobs"):
        value = getattr(args, name)
        if value is not None:
            argv += [f"--{name}", str(value)]
    return main(argv)


if __name__ == "__main__":
    sys.exit(forward(parse_args(sys.argv[1:])))
