#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Command-line interface: openbath <scenario> [--config PATH] [options]."""

from __future__ import annotations

import argparse
import logging
import sys

from openbath import __version__
from openbath.errors import ConfigError

from .config import SCENARIOS, load_config
from .scenarios import run_scenario

logger = logging.getLogger(__name__)

HELP = {
    "coeffs": "closed-form spectral pair against quadrature",
    "simulate": "damped-oscillator moments and correlations by propagation",
    "compare": "composite against derived reduced dynamics",
    "thermalize": "thermal weak-damping generator and simple-Markov heating",
    "classical": "classical Langevin ensembles and their statistics",
    "validate": "run a selection of the acceptance checks",
}


# - local functions --------------------------------
def seed_type(string: str) -> int:
    """Parse an unsigned 64-bit seed."""
    try:
        res = int(string, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{string!r} is not an integer") from exc
    if not 0 <= res < 2**64:
        raise argparse.ArgumentTypeError(f"{string!r} is not an unsigned 64-bit value")
    return res


def positive_int(string: str) -> int:
    """Parse a strictly positive integer."""
    try:
        res = int(string)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{string!r} is not an integer") from exc
    if res < 1:
        raise argparse.ArgumentTypeError(f"{string!r} must be at least 1")
    return res


def build_parser() -> argparse.ArgumentParser:
    """Return the parser with one subcommand per scenario."""
    parser = argparse.ArgumentParser(
        prog="openbath",
        description="master equations for systems coupled to open environments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(title="scenarios", dest="scenario",
                                       required=True)
    for name in SCENARIOS:
        sub = subparsers.add_parser(name, help=HELP[name])
        sub.add_argument("--config", default=None,
                         help="JSON (or TOML) configuration, defaults when omitted")
        sub.add_argument("--out", default=None, help="output directory")
        sub.add_argument("--seed", type=seed_type, default=None,
                         help="seed of all random draws (unsigned 64-bit)")
        sub.add_argument("--threads", type=positive_int, default=None,
                         help="size of the worker pool")
        sub.add_argument("--verbose", action="store_true", default=False,
                         help="show debug messages")
        sub.set_defaults(func=run_scenario)
    return parser


# - main code --------------------------------------
def main(argv: list[str] | None = None) -> int:
    """Parse the command line, run the scenario and return its exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        format="# %(levelname)s - %(message)s",
        level=logging.DEBUG if args.verbose else logging.INFO,
        force=True,
    )
    try:
        config = load_config(
            args.config,
            args.scenario,
            {"out": args.out, "seed": args.seed, "threads": args.threads},
        )
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("cannot read configuration: %s", exc)
        return 4
    return args.func(config)


if __name__ == "__main__":
    sys.exit(main())
