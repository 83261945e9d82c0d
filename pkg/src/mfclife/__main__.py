import logging.config
import sys
import typing

from argparse import ArgumentParser, RawDescriptionHelpFormatter

from pydantic import ValidationError

from . import MfcLifeError
from .commands import CommandCLI, ExitStatus, pretty_print_exception, register_commands, render_commands_description
from .commands.sim_commands import SIM_COMMANDS
from .configuration import ConfigFileError
from .lattice import TraceTooShortError, UnverifiedPlanError
from .patterns import PatternParseError


def create_logging_config(debug_mode: bool, quiet: bool) -> dict:
    if debug_mode:
        level = "DEBUG"
    elif quiet:
        level = "WARNING"
    else:
        level = "INFO"

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "default": {
                "format": "[%(asctime)s] [%(levelname)s] - %(message)s",
                "datefmt": "%H:%M:%S",
            },
            "debug": {
                "format": "[%(asctime)s] [%(name)s %(levelname)s] - %(message)s",
            }
        },
        "handlers": {
            "print": {
                "class": "logging.StreamHandler",
                "level": "DEBUG",
                "formatter": "default" if not debug_mode else "debug",
                "stream": "ext://sys.stderr",
            },
        },
        "loggers": {
            "mfc_life": {
                "level": level,
                "handlers": ["print"],
                "propagate": False,
            },
        }
    }


def create_parser(out: typing.TextIO | None = None) -> tuple[ArgumentParser, list[CommandCLI]]:
    common = ArgumentParser(add_help=False)
    common.add_argument("--debug", help="Configure debug mode, with more verbose logging and error messages.", action="store_true")
    common.add_argument("--quiet", help="Only print errors; the exit status tells the result.", action="store_true")
    common.add_argument("--profile", help="Profile the application using cProfile. Generates a prof.pstats file at exit.", action="store_true")
    common.add_argument("--config", help="INI config file with [run], [plan], [dynamics], [circuit] and [sweep] sections.")

    parser = ArgumentParser("mfc-life", formatter_class=RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(title="commands", dest="command_name", required=True)
    commands = register_commands(subparsers, SIM_COMMANDS, [common], out)

    parser.description = "\n".join(render_commands_description(commands))
    return parser, commands


def run_command(argv: typing.Sequence[str] | None = None, out: typing.TextIO | None = None) -> int:
    """
    Parse `argv`, run the selected command and return its exit status.

    Errors never escape: they are printed to stderr and mapped to an ExitStatus.
    """
    parser, _ = create_parser(out)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ExitStatus.OK if e.code in (0, None) else ExitStatus.USAGE

    logging.config.dictConfig(create_logging_config(args.debug, args.quiet))
    logger = logging.getLogger("mfc_life.commands")

    try:
        return int(args.command(args))
    except (PatternParseError, ConfigFileError, TraceTooShortError, OSError) as e:
        pretty_print_exception(e, args.debug)
        return ExitStatus.INPUT_ERROR
    except UnverifiedPlanError as e:
        pretty_print_exception(e, args.debug)
        return ExitStatus.FAILED
    except (ValidationError, MfcLifeError, ValueError) as e:
        pretty_print_exception(e, args.debug)
        return ExitStatus.USAGE
    except Exception as e:
        logger.critical("Unexpected failure running '%s'.", args.command_name)
        pretty_print_exception(e, True)
        return ExitStatus.FAILED


def entrypoint():
    profile = "--profile" in sys.argv[1:]

    if profile:
        import cProfile
        _prof = cProfile.Profile()
        _prof.enable()

    status = run_command(sys.argv[1:])

    if profile:
        _prof.disable()

        import pstats
        stats = pstats.Stats(_prof, stream=sys.stderr)
        stats.sort_stats("cumtime")
        stats.reverse_order()
        stats.print_stats()
        stats.dump_stats("prof.pstats")

    sys.exit(status)


if __name__ == "__main__":
    entrypoint()
