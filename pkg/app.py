"""
Logarithmic morphology toolkit
Main entry point that configures logging and runs a command line subcommand
"""

import logging
import os
import sys

from src.cli.commands import EXIT_USAGE, parse_args, run
from src.errors import ConfigError

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVEL_ENV = "LMM_LOG_LEVEL"

logger = logging.getLogger(__name__)


def configure_logging(level=None):
    """Configure the root logger from ``level``, else $LMM_LOG_LEVEL, else INFO."""
    name = (level or os.environ.get(LOG_LEVEL_ENV) or "INFO").upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        numeric = logging.INFO
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)
    if name != logging.getLevelName(numeric):
        logger.warning("unknown log level %r, using INFO", name)


def main(argv=None):
    """
    Parse ``argv`` and run the selected subcommand.

    Returns:
        int: Exit status
    """
    try:
        args = parse_args(argv)
    except (ConfigError, FileNotFoundError) as exc:
        configure_logging()
        logger.error("configuration: %s", exc)
        return EXIT_USAGE
    configure_logging(args.log_level)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
