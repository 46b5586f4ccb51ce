"""Command-line front end.

Subcommands map onto the experiment runners: ``gen`` exports a dataset
bundle, ``train`` runs one configured training run with its analysis
bundle, ``analyze`` recomputes graph measures for a saved checkpoint, and
``fig3``/``fig4``/``fig5`` run the aggregate experiments. Settings come
from an optional flat JSON config file; ``--seed``, ``--repeats`` and
``--jobs`` override it from the command line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import (
    ConfigError,
    ContractViolationError,
    TrainingDivergedError,
    UnsupportedTaskError,
)
from .experiments import RUNNERS

_COMMANDS = {
    # command -> (config experiment profile, runner key, help text)
    "gen": ("single", "gen", "generate a task dataset and export it as CSV"),
    "train": ("single", "single", "train one network and write the analysis bundle"),
    "analyze": ("single", "analyze", "graph measures for a saved checkpoint"),
    "fig3": ("fig3", "fig3", "correlate graph measures with optimal maps"),
    "fig4": ("fig4", "fig4", "hop-power routing analysis on the on-off task"),
    "fig5": ("fig5", "fig5", "sparsity sweep comparing both penalties"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathweaver",
        description="Train small recurrent networks on modular temporal tasks "
        "and analyse their multi-hop input-output routing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, _, help_text) in _COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, default=None, help="JSON config file")
        cmd.add_argument("--out", type=Path, required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="base seed override")
        cmd.add_argument(
            "--repeats", type=int, default=None, help="repeat count override"
        )
        cmd.add_argument(
            "--jobs", type=int, default=None, help="parallel worker processes"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    experiment, runner_key, _ = _COMMANDS[args.command]
    overrides = {
        key: value
        for key, value in (
            ("seed", args.seed),
            ("repeats", args.repeats),
            ("jobs", args.jobs),
        )
        if value is not None
    }
    try:
        config = load_config(experiment, args.config, overrides)
        result = RUNNERS[runner_key](config, args.out)
    except (
        ConfigError,
        ContractViolationError,
        UnsupportedTaskError,
        TrainingDivergedError,
        FileNotFoundError,
    ) as exc:
        print(f"pathweaver {args.command}: error: {exc}", file=sys.stderr)
        return 2
    elapsed = result.report.get("elapsed_seconds")
    suffix = f" in {elapsed}s" if elapsed is not None else ""
    print(f"pathweaver {args.command}: wrote {args.out}{suffix}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
