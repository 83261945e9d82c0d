import enum
import inspect
import logging
import sys
import typing

from abc import ABC, abstractmethod
from argparse import ArgumentParser, Namespace, RawDescriptionHelpFormatter

from pydantic import BaseModel

from .. import REPORT_NAME_EXTEND
from ..configuration import RunConfig, RunMode, resolve_run_config


class ExitStatus(enum.IntEnum):
    OK = 0
    FAILED = 1
    """A check did not hold (equivalence, verification, blinker assertions)."""
    USAGE = 2
    INPUT_ERROR = 3
    """A pattern, config or trace file could not be read or parsed."""


def pretty_print_exception(exc: BaseException, debug_mode: bool, file: typing.TextIO | None = None):
    """Pretty-print an Exception's traceback, in full only in debug mode."""
    limit = None if debug_mode else 1

    import traceback
    tb = [i.split("\n") for i in traceback.format_exception(type(exc), exc, exc.__traceback__, limit=limit, chain=debug_mode)]
    print("\n".join(f"*** {i}" for item in tb for i in item if i != ""), file=file or sys.stderr)


def report_line(name: str, desc: str) -> str:
    return f"{name:<{REPORT_NAME_EXTEND}}: {desc}"


class CommandCLI(ABC):
    """
    Base class for the subcommands.

    Attributes
    ----------
    mode : RunMode
        Mode the resolved RunConfig is validated for.
    """

    mode: RunMode

    def __init__(self, name: str, out: typing.TextIO | None = None):
        self._name = name
        self._out = out
        self._quiet = False
        self._logger = logging.getLogger("mfc_life.commands")

    @property
    def name(self) -> str:
        return self._name

    @property
    def out(self) -> typing.TextIO:
        return self._out or sys.stdout

    def echo(self, *lines: str):
        """Print user-facing lines, unless running quietly."""
        if self._quiet:
            return
        for line in lines:
            print(line, file=self.out)

    def create_parser(self, subparsers, parents: list[ArgumentParser]) -> ArgumentParser:
        _a = subparsers.add_parser(
            self._name,
            help=self.summary(),
            description=self._description(),
            parents=parents,
            formatter_class=RawDescriptionHelpFormatter,
        )
        self.add_arguments(_a)
        _a.set_defaults(command=self)
        return _a

    @abstractmethod
    def add_arguments(self, parser: ArgumentParser):
        ...

    def config_values(self, args: Namespace) -> dict[str, typing.Any]:
        """RunConfig keyword values given on the command line. `None` means not given."""
        return {}

    @abstractmethod
    def execute(self, config: RunConfig, args: Namespace) -> ExitStatus:
        ...

    def __call__(self, args: Namespace) -> ExitStatus:
        self._quiet = getattr(args, "quiet", False)

        config = resolve_run_config(self.mode, self.config_values(args), getattr(args, "config", None))
        self._logger.debug("Running '%s' with %r.", self._name, config)
        return self.execute(config, args)

    def summary(self) -> str:
        return self._description().split("\n")[0]

    def _description(self) -> str:
        """Description of the command on the CLI help page."""
        return inspect.getdoc(self) or ""


class CommandInformation(BaseModel):
    """
    Container for instantiation information about a subcommand.

    Attributes
    ----------
    name : str
        The subcommand name, as typed by the user.
    command_class : CommandCLI subclass
        The class defining the subcommand interface and behavior.
    """

    name: str
    command_class: object

    def __init__(self, name: str, command_class: type[CommandCLI]):
        super().__init__(name=name, command_class=command_class)

    def instantiate(self, out: typing.TextIO | None = None) -> CommandCLI:
        return self.command_class(self.name, out)


class CommandRegistry(list[CommandInformation]):
    """Ordered collection of the subcommands exposed by the entry point."""

    def __init__(self, *infos: CommandInformation):
        super().__init__(infos)


def render_commands_description(commands: typing.Iterable[CommandCLI]) -> list[str]:
    render = []
    render.append("The available commands are:")
    for command in commands:
        render.append(report_line(command.name, command.summary()))
    return render


def register_commands(subparsers, registry: CommandRegistry, parents: list[ArgumentParser], out: typing.TextIO | None = None) -> list[CommandCLI]:
    """Instantiate every registered command and attach its parser."""
    commands = []
    for info in registry:
        command = info.instantiate(out)
        command.create_parser(subparsers, parents)
        commands.append(command)
    return commands
