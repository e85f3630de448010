#!/usr/bin/env python3
"""isorb isospectral metric toolkit

Usage:
  isorb generate M STEPS [--step-size X] [--config PATH] [--seed N] [--out DIR]
  isorb verify FILE1 FILE2 [--tex] [--config PATH] [--seed N] [--samples N] [--mu-range N] [--cutoff X] [--out PATH]
  isorb orbit point FILE [--config PATH] [--cutoff X] [--out PATH]
  isorb orbit stratum A B [--config PATH] [--cutoff X] [--out PATH]
  isorb certify FILE1 FILE2 [--config PATH] [--out PATH]
  isorb --version
  isorb -h | --help

Options:
  --config PATH    Run configuration file, JSON format
  --seed N         Seed for every random draw
  --samples N      Random samples per check
  --mu-range N     Check the lattice functionals with |k1|, |k2| <= N
  --cutoff X       Cutoff for flat-torus spectra
  --out PATH       Output file (verify, orbit, certify) or directory (generate)
  --step-size X    Continuation step size [default: 0.05]
  --tex            Also write the report as LaTeX
  -h --help        HELP!
  --version        Show version info

Arguments:
  M            Matrix size of the j-maps (at least 3)
  STEPS        Number of continuation steps
  FILE1 FILE2  j-map files, JSON format
  FILE         Sphere point {"u": [[re, im], ...], "v": [[re, im], [re, im]]}
  A B          Orbit type |v1| = A, |v2| = B

Exit codes: 0 success, 1 usage, input or domain error, 2 verification failure
or diverged continuation.

"""
from docopt import docopt
import sys
import logging

from isorb.utils import json_parser
from isorb.settings import RunConfig
from isorb.generation import (
    USER_ERRORS,
    cmd_certify,
    cmd_generate,
    cmd_orbit,
    cmd_verify,
)
from isorb._version import __VERSION__


def _number(args, flag, kind):
    if args[flag] is None:
        return None
    try:
        return kind(args[flag])
    except ValueError:
        raise ValueError("Invalid value for {}: {}".format(flag, args[flag]))


def load_config(args):
    """Built-in defaults, then the config file, then command line flags"""
    if args["--config"] is not None:
        config = RunConfig(args["--config"], json_parser(args["--config"]))
    else:
        config = RunConfig()
    flags = {
        "seed": _number(args, "--seed", int),
        "samples": _number(args, "--samples", int),
        "mu_range": _number(args, "--mu-range", int),
        "cutoff": _number(args, "--cutoff", float),
    }
    if not args["generate"]:
        flags["output_path"] = args["--out"]
    config.override(**flags)
    return config


def run(args):
    logger = logging.getLogger(__name__)
    try:
        config = load_config(args)
    except (ValueError,) + USER_ERRORS as e:
        logger.error(str(e))
        return 1

    if args["generate"]:
        try:
            m = int(args["M"])
            steps = int(args["STEPS"])
            step_size = float(args["--step-size"])
        except ValueError as e:
            logger.error(str(e))
            return 1
        return cmd_generate(config, m, steps, step_size, args["--out"] or "family")
    if args["verify"]:
        return cmd_verify(config, args["FILE1"], args["FILE2"], args["--tex"])
    if args["orbit"]:
        if args["stratum"]:
            try:
                stratum = (float(args["A"]), float(args["B"]))
            except ValueError as e:
                logger.error(str(e))
                return 1
            return cmd_orbit(config, stratum=stratum)
        return cmd_orbit(config, point_path=args["FILE"])
    if args["certify"]:
        return cmd_certify(config, args["FILE1"], args["FILE2"])
    return 1


def main(argv=None):
    args = docopt(__doc__, argv=argv, help=True, version="isorb " + __VERSION__)
    logging.basicConfig(
        filename="debug.log",
        filemode="w",
        datefmt="%a, %d %b %Y %H:%M:%S",
        format="%(asctime)s %(name)-15s %(levelname)-8s %(message)s",
        level=logging.DEBUG,
    )
    # Define a handler which writes INFO or higher to sys.stderr
    console = logging.StreamHandler()
    console.setLevel(logging.INFO)
    # Define a simpler format for sys.stderr
    formatter = logging.Formatter("%(message)s")
    console.setFormatter(formatter)
    logging.getLogger("").addHandler(console)
    logger = logging.getLogger(__name__)

    try:
        code = run(args)
    except Exception:
        logger.exception("An unresolvable error has occurred...")
        code = 1

    sys.exit(code)


if __name__ == "__main__":
    main()
