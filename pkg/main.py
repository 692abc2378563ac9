import argparse
import importlib
import logging
import sys
import time
from typing import List, Optional

import psutil

from config import get_log_file
from polariton.errors import (ConfigError, DomainError, InstabilityError, NumericalError, PolaritonError,
                              SweepError)
from utils.constants import EXIT_CODES
from utils.helpers import format_duration

logger = logging.getLogger(__name__)

COGS = [
    'cogs.dispersion',
    'cogs.fitting',
    'cogs.spectra',
    'cogs.presets',
]


class CommandParser(argparse.ArgumentParser):
    """Argument parser whose usage errors go through the global error handler."""

    def error(self, message):
        raise ConfigError(message)


def configure_logging(verbosity: int = 0):
    """File log at WARNING (or lower with -v); stderr only shows log records with -v."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    stream = logging.StreamHandler(sys.stderr)
    stream.setLevel(level if verbosity else logging.CRITICAL + 1)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(get_log_file()),
            stream,
        ],
        force=True,
    )


def log_host_resources():
    try:
        memory = psutil.virtual_memory()
        logger.debug(f"Host: {psutil.cpu_count(logical=True)} logical CPUs, memory {memory.percent}% used")
    except Exception as e:
        logger.debug(f"Host resources unavailable: {e}")


def load_cogs(subparsers):
    """Load all cogs."""
    for cog in COGS:
        try:
            module = importlib.import_module(cog)
            module.setup(subparsers)
            logger.debug(f"Loaded cog: {cog}")
        except Exception as e:
            logger.error(f"Failed to load cog {cog}: {e}")


def build_parser() -> CommandParser:
    parser = CommandParser(
        prog='hopfield',
        description='Multimode Hopfield model of phonon-photon polaritons in THz nanoslot cavities.')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log INFO (-v) or DEBUG (-vv) to stderr')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)
    load_cogs(subparsers)
    return parser


def on_command_error(command: Optional[str], error: BaseException) -> int:
    """Global error handler: one stderr line and an exit code per error family."""
    if isinstance(error, (ConfigError, DomainError)):
        code = EXIT_CODES['invalid']
    elif isinstance(error, (InstabilityError, NumericalError, SweepError)):
        code = EXIT_CODES['numerical']
    elif isinstance(error, OSError):
        code = EXIT_CODES['invalid']
    else:
        code = EXIT_CODES['unexpected']

    if isinstance(error, PolaritonError):
        kind = error.kind
        logger.warning(f"Command {command} failed: {error}")
    elif isinstance(error, OSError):
        kind = 'io'
        logger.error(f"I/O error in command {command}: {error}")
    else:
        kind = 'internal'
        logger.exception(f"Unhandled error in command {command}: {error}")

    message = ' '.join(str(error).split()) or type(error).__name__
    print(f"error[{kind}]: {message}", file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
    except ConfigError as e:
        return on_command_error(None, e)

    configure_logging(args.verbose)
    log_host_resources()

    started = time.monotonic()
    try:
        code = args.handler(args)
    except Exception as e:
        return on_command_error(args.command, e)
    logger.info(f"{args.command} finished in {format_duration(time.monotonic() - started)}")
    return code or EXIT_CODES['ok']


if __name__ == "__main__":
    sys.exit(main())
