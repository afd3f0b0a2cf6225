"""
Ultralap Command Line

Version: 1.0

Description:
    Subcommands validate, spectrum, heat, kernel, sample and bvp, all reading a
    JSON experiment config and writing a result bundle. The process exit code
    is 0 on success, 2 for configuration errors, 3 for precondition failures
    and divergence, 4 for unsupported initial data and 5 for internal errors.

Usage:
    python app/main.py spectrum --config configs/tate.json --out runs/tate
    python app/main.py sample --config configs/tate.json --seed 7 --threads 4
"""

import argparse
import logging
import sys

from scripts.errors import EXIT_INTERNAL, UltralapError
from scripts.tasks import TASK_NAMES, run_task

logger = logging.getLogger("ultralap")

HELP = {
    "validate": "check group, fundamental domain, convergence and orbits",
    "spectrum": "wavelet spectrum with tail bounds",
    "heat": "solve the Cauchy problem on a time grid",
    "kernel": "evaluate the heat kernel",
    "sample": "simulate jump paths",
    "bvp": "solve a Dirichlet or von Neumann problem",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ultralap", description="Invariant ultrametric Laplacians on Mumford curves")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="task", required=True)
    for name in TASK_NAMES:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", required=True, help="experiment config (.json)")
        p.add_argument("--out", help="output directory (default: per-user data dir)")
        p.add_argument("--threads", type=int, help="worker threads (default: $ULTRALAP_THREADS or 1)")
        p.add_argument("--seed", type=int, help="sampler seed, overrides the config")
    return parser


def setup_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.quiet)
    try:
        result = run_task(args.task, args.config, args.out, args.threads, args.seed)
    except UltralapError as e:
        logger.error("❌ %s: %s", type(e).__name__, e)
        return e.exit_code
    except Exception:
        logger.exception("❌ Internal error")
        return EXIT_INTERNAL
    logger.info("✅ %s finished with exit code %d, results in %s", args.task, result.exit_code, result.out_dir)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
