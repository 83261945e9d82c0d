"""
Run configuration: command-line values, INI config files and environment defaults.

Precedence, from weakest to strongest: environment variables (see `ENVVARS`),
the `--config` file, explicit command-line flags.
"""

import configparser
import enum
import io
import logging
import math
import typing

from pathlib import Path

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from . import ENVVARS, MfcLifeError
from .ca_engine import GAME_OF_LIFE, Boundary, Neighborhood, OuterTotalisticRule, parse_rule
from .circuit import CircuitCellParams
from .lattice import PRESETS, SAMPLING_PHASE, CellDynamics, DynamicsPreset
from .patterns import PatternFormat
from .rule_synth import BandPlan


_logger = logging.getLogger("mfc_life.config")

KNOWN_SECTIONS = ("run", "plan", "dynamics", "circuit", "sweep")


class ConfigFileError(MfcLifeError, ValueError):
    ...


class RunMode(enum.StrEnum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"
    CIRCUIT = "circuit"
    SYNTH = "synth"
    SWEEP = "sweep"


def parse_pair(text: str, cast: typing.Callable = float) -> tuple:
    """'2,7' -> (2.0, 7.0)."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2 or "" in parts:
        raise ValueError(f"Expected two comma-separated values, got '{text}'.")
    return cast(parts[0]), cast(parts[1])


class SweepSettings(BaseModel):
    """Sinusoid driving a single circuit cell. The defaults span 0-10 V over one 1 kHz period."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    amplitude: float = 5.0
    offset: float = 5.0
    freq: float = 1000.0
    t_end: float = 1e-3
    dt: float = 1e-6

    @field_validator("freq")
    @classmethod
    def _check_freq(cls, value: float) -> float:
        if value < 0:
            raise ValueError(f"The frequency must not be negative, got {value}.")
        return value


class RunConfig(BaseModel):
    """
    Everything a command needs, validated for the selected mode.

    Attributes
    ----------
    mode : RunMode
        Which command runs.
    pattern : Path, optional
        Pattern file for the initial grid. Mutually exclusive with `inline`.
    inline : str, optional
        Pattern text given directly.
    steps, t_end : optional
        Discrete steps, or simulated time in seconds for continuous runs. A
        continuous run needs at least one of them and derives the other.
    preset : DynamicsPreset
        Cell timing; `custom` takes it from `dynamics`.
    plan : BandPlan, optional
        Plan to use instead of synthesizing one from `rule`.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    mode: RunMode
    rule: OuterTotalisticRule = GAME_OF_LIFE
    pattern: Path | None = None
    inline: str | None = None
    pattern_format: PatternFormat | None = None
    width: int | None = None
    height: int | None = None
    offset: tuple[int, int] = (0, 0)
    boundary: Boundary = Boundary.DEAD
    neighborhood: Neighborhood = Neighborhood.MOORE
    steps: int | None = None
    t_end: float | None = None
    preset: DynamicsPreset = DynamicsPreset.CIRCUIT_1MS
    dynamics: CellDynamics | None = None
    volt_window: tuple[float, float] = (2.0, 7.0)
    temperature: float = 0.0
    plan: BandPlan | None = None
    circuit: CircuitCellParams = CircuitCellParams()
    sweep: SweepSettings = SweepSettings()
    out: Path | None = None
    emit: str = "ascii"
    explicit: frozenset[str] = frozenset()
    """Keys given by the config file or the command line, as opposed to environment defaults."""

    @field_validator("rule", mode="before")
    @classmethod
    def _rule_from_text(cls, value):
        return parse_rule(value) if isinstance(value, str) else value

    @field_validator("preset", mode="before")
    @classmethod
    def _preset_from_text(cls, value):
        return DynamicsPreset.from_text(value) if isinstance(value, str) else value

    @field_validator("volt_window", mode="before")
    @classmethod
    def _window_from_text(cls, value):
        return parse_pair(value) if isinstance(value, str) else value

    @field_validator("offset", mode="before")
    @classmethod
    def _offset_from_text(cls, value):
        return parse_pair(value, int) if isinstance(value, str) else value

    @field_validator("emit")
    @classmethod
    def _known_emit(cls, value: str) -> str:
        if value not in ("ascii", "rle"):
            raise ValueError(f"emit must be 'ascii' or 'rle', got '{value}'.")
        return value

    @model_validator(mode="after")
    def _mode_requirements(self):
        needs_grid = self.mode in (RunMode.DISCRETE, RunMode.CONTINUOUS)

        if needs_grid and self.pattern is None and self.inline is None:
            raise ValueError(f"Mode '{self.mode}' needs an initial grid (a pattern file or inline pattern).")
        if self.pattern is not None and self.inline is not None:
            raise ValueError("Give either a pattern file or an inline pattern, not both.")
        if self.pattern is not None and not self.pattern.is_file():
            raise ValueError(f"The pattern file '{self.pattern}' does not exist.")

        if self.mode == RunMode.DISCRETE and self.steps is None:
            raise ValueError("Mode 'discrete' needs the number of steps.")
        if self.mode == RunMode.CONTINUOUS and self.steps is None and self.t_end is None:
            raise ValueError("Mode 'continuous' needs the number of steps or t_end.")
        if self.steps is not None and self.steps < 0:
            raise ValueError("steps must be non-negative.")
        if self.t_end is not None and self.t_end <= 0:
            raise ValueError("t_end must be positive.")

        if self.preset == DynamicsPreset.CUSTOM and self.dynamics is None:
            raise ValueError("The custom preset needs a [dynamics] section.")
        if self.width is not None and self.width <= 0 or self.height is not None and self.height <= 0:
            raise ValueError("width and height must be positive.")
        return self

    def rule_for(self, pattern_rule: OuterTotalisticRule | None) -> OuterTotalisticRule:
        """A rule declared by the pattern file wins over the environment default, not over explicit settings."""
        if pattern_rule is not None and "rule" not in self.explicit:
            return pattern_rule
        return self.rule

    @property
    def cell_dynamics(self) -> CellDynamics:
        if self.preset == DynamicsPreset.CUSTOM:
            return self.dynamics
        return PRESETS[self.preset]

    def continuous_span(self) -> tuple[int, float]:
        """(steps to sample, simulated time) of a continuous run, one derived from the other."""
        d = self.cell_dynamics.delay_d
        if self.t_end is None:
            return self.steps, (self.steps + SAMPLING_PHASE) * d

        available = math.floor(self.t_end / d - SAMPLING_PHASE + 1e-9)
        if available < 0:
            raise ValueError(f"t_end ({self.t_end} s) is shorter than the first sampling instant ({SAMPLING_PHASE * d} s).")
        if self.steps is None:
            return available, self.t_end
        if self.steps > available:
            raise ValueError(f"t_end ({self.t_end} s) only covers {available} steps, {self.steps} were requested.")
        return self.steps, self.t_end


def _parse_bands(text: str) -> list[tuple[float, float]]:
    bands = []
    for item in text.split(","):
        item = item.strip()
        if item == "":
            continue
        lo, sep, hi = item.partition(":")
        if sep == "":
            raise ValueError(f"Bands are written as 'lo:hi', got '{item}'.")
        bands.append((float(lo), float(hi)))
    return bands


def plan_from_section(section: typing.Mapping[str, str]) -> BandPlan:
    """Build a plan from the `[plan]` keys: w_self, bands ('lo:hi, lo:hi'), neighborhood."""
    try:
        return BandPlan(
            float(section["w_self"]),
            _parse_bands(section.get("bands", "")),
            Neighborhood(section.get("neighborhood", Neighborhood.MOORE)),
        )
    except KeyError as e:
        raise ConfigFileError(f"The [plan] section is missing the '{e.args[0]}' key.") from e


def plan_to_config_text(plan: BandPlan, rule: OuterTotalisticRule) -> str:
    """Config text holding the rule and its plan, readable by `load_config_file`."""
    parser = configparser.ConfigParser()
    parser["run"] = {"rule": rule.notation, "neighborhood": plan.neighborhood.value}
    parser["plan"] = {
        "w_self": f"{plan.w_self:g}",
        "bands": ", ".join(f"{lo:.17g}:{hi:.17g}" for lo, hi in plan.bands),
        "neighborhood": plan.neighborhood.value,
    }

    buffer = io.StringIO()
    buffer.write(f"# Band plan realizing {rule.notation}: {plan.describe()}\n")
    parser.write(buffer)
    return buffer.getvalue().rstrip("\n") + "\n"


_RUN_KEYS = {
    "mode", "rule", "pattern", "inline", "format", "width", "height", "offset", "boundary", "neighborhood",
    "steps", "t_end", "preset", "volt_window", "temperature", "out", "emit",
}
_PLAN_KEYS = {"w_self", "bands", "neighborhood"}


def _section_values(parser: configparser.ConfigParser, name: str, known: typing.Collection[str]) -> dict[str, str]:
    section = dict(parser[name])
    unknown_keys = set(section) - set(known)
    if unknown_keys:
        raise ConfigFileError(f"Unknown keys in [{name}]: {sorted(unknown_keys)}. Known keys are {sorted(known)}.")
    return section


def parse_config_text(text: str, base_dir: Path | None = None) -> dict[str, typing.Any]:
    """
    Read INI config text into RunConfig keyword values.

    Relative paths in `[run]` are resolved against `base_dir`. A `[dynamics]`
    section implies the custom preset unless `[run] preset` says otherwise.

    Raises
    ------
    ConfigFileError
        On syntax errors, unknown sections or unknown keys.
    """
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigFileError(f"Invalid config file: {e}") from e

    unknown = set(parser.sections()) - set(KNOWN_SECTIONS)
    if unknown:
        raise ConfigFileError(f"Unknown config sections: {sorted(unknown)}. Known sections are {list(KNOWN_SECTIONS)}.")

    values: dict[str, typing.Any] = {}
    if parser.has_section("run"):
        run = _section_values(parser, "run", _RUN_KEYS)

        if "format" in run:
            run["pattern_format"] = run.pop("format")
        for key in ("pattern", "out"):
            if key in run and base_dir is not None:
                run[key] = str(base_dir / run[key])
        values.update(run)

    if parser.has_section("plan"):
        values["plan"] = plan_from_section(_section_values(parser, "plan", _PLAN_KEYS))
    if parser.has_section("dynamics"):
        values["dynamics"] = CellDynamics(**_section_values(parser, "dynamics", CellDynamics.model_fields))
        values.setdefault("preset", DynamicsPreset.CUSTOM)
    if parser.has_section("circuit"):
        values["circuit"] = CircuitCellParams(**_section_values(parser, "circuit", CircuitCellParams.model_fields))
    if parser.has_section("sweep"):
        values["sweep"] = SweepSettings(**_section_values(parser, "sweep", SweepSettings.model_fields))

    _logger.debug("Config values read: %s", sorted(values))
    return values


def load_config_file(path: str | Path) -> dict[str, typing.Any]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigFileError(f"Could not read the config file '{path}': {e.strerror}.") from e

    _logger.info("Loading configuration from '%s'.", path)
    return parse_config_text(text, base_dir=path.parent)


def environment_defaults() -> dict[str, str]:
    return {
        "rule": ENVVARS.RULE,
        "boundary": ENVVARS.BOUNDARY,
        "preset": ENVVARS.PRESET,
        "volt_window": ENVVARS.VOLT_WINDOW,
    }


def resolve_run_config(mode: RunMode, cli_values: typing.Mapping[str, typing.Any], config_path: str | Path | None = None) -> RunConfig:
    """Merge environment defaults, the config file and explicit flags (`None` values are ignored)."""
    values: dict[str, typing.Any] = environment_defaults()
    given: dict[str, typing.Any] = {}
    if config_path is not None:
        given.update(load_config_file(config_path))
    given.update({k: v for k, v in cli_values.items() if v is not None})

    values.update(given)
    values["explicit"] = frozenset(given)

    if "mode" in values and RunMode(values.pop("mode")) != mode:
        _logger.warning("The config file mode is ignored; running '%s'.", mode)
    return RunConfig(mode=mode, **values)
