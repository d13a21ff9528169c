#!/usr/bin/env python3
"""
drivenkerr command line.

    drivenkerr <subcommand> --config run.json [--out-dir results] [--threads N] [--seed S]

Subcommands: spectrum | dispersion | fulldiag | cat | rates | regimes | scan.
"""

import argparse
import logging
import sys
from typing import List, Optional

from ..config import DEFAULTS, EXIT_CODES, SUBCOMMANDS
from ..errors import ConfigError, DrivenKerrError
from ..utils import load_config, setup_logging
from .commands import COMMANDS

logger = logging.getLogger("drivenkerr.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivenkerr",
        description="Drive-engineered Kerr nonlinearities of a transmon-coupled cavity",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Computation to run")
    parser.add_argument("--config", required=True, help="Run configuration (JSON or YAML)")
    parser.add_argument("--out-dir", default="results", help="Directory for output datasets")
    parser.add_argument("--threads", type=int, default=None,
                        help="Worker processes for sweeps (default: physical cores)")
    parser.add_argument("--seed", type=int, default=DEFAULTS['SEED'],
                        help="Seed for simulated measurement noise")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--log-dir", default=DEFAULTS['LOG_DIR'],
                        help="Directory for log files (empty to disable)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_dir or None, debug=args.debug)

    try:
        config = load_config(args.config)
        logger.info(f"Running {args.subcommand} with {args.config}")
        written = COMMANDS[args.subcommand](config, args.out_dir, threads=args.threads,
                                            seed=args.seed)
        for path in written:
            print(path)
        return EXIT_CODES['OK']
    except ConfigError as e:
        logger.error(f"Error in configuration: {str(e)}")
        return e.exit_code
    except DrivenKerrError as e:
        logger.error(f"Error running {args.subcommand}: {str(e)}")
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return EXIT_CODES['UNEXPECTED']
    except Exception as e:
        logger.error(f"Unexpected error in {args.subcommand}: {str(e)}")
        return EXIT_CODES['UNEXPECTED']


if __name__ == "__main__":
    sys.exit(main())
