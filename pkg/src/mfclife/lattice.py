"""
Continuous-time simulation of a lattice of band-transfer cells.

Every cell aggregates its neighbors' output power into an input bias, passes
it through its band transfer, and relaxes towards the result with a first-order
lag. The delay element is clocked: the band decision is latched once per delay
window, at the window edge, and drives the lag for the whole window. Sampled
just before each edge, the analog lattice reproduces the discrete automaton.
"""

import enum
import logging
import math
import typing

from dataclasses import dataclass, field

import numpy as np

from pydantic import BaseModel, ConfigDict, model_validator

from . import MfcLifeError
from .ca_engine import GAME_OF_LIFE, Boundary, Grid, Neighborhood, OuterTotalisticRule
from .rule_synth import BandPlan, Infeasible, plan_to_volts, synthesize, verify
from .transfer_model import AffineCalibration, BandParams, aggregate_lattice, band_output


_logger = logging.getLogger("mfc_life.lattice")

SAMPLING_PHASE = 0.9
"""Fraction of a delay window at which the lattice is sampled."""

_REL_TOL = 1e-9


class TraceTooShortError(MfcLifeError, ValueError):
    ...


class ShapeMismatchError(MfcLifeError, ValueError):
    ...


class UnverifiedPlanError(MfcLifeError):
    ...


class CellDynamics(BaseModel):
    """
    Timing of a cell.

    Attributes
    ----------
    delay_d : float
        Delay window, in seconds. A change of input reaches the output one window later.
    tau : float
        First-order settling constant, in seconds.
    dt : float
        Fixed integration step, in seconds.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    delay_d: float
    tau: float
    dt: float

    @model_validator(mode="after")
    def _check_synchrony(self):
        if min(self.delay_d, self.tau, self.dt) <= 0:
            raise ValueError("delay_d, tau and dt must all be positive.")
        if self.dt > self.tau / 20 * (1 + _REL_TOL):
            raise ValueError(f"dt ({self.dt}) must not exceed tau / 20 ({self.tau / 20}).")
        if self.delay_d < 10 * self.tau * (1 - _REL_TOL):
            raise ValueError(f"delay_d ({self.delay_d}) must be at least 10 * tau ({10 * self.tau}).")
        n = round(self.delay_d / self.dt)
        if abs(n * self.dt - self.delay_d) > _REL_TOL * self.delay_d:
            raise ValueError(f"delay_d ({self.delay_d}) must be an integer multiple of dt ({self.dt}).")
        return self

    @property
    def steps_per_delay(self) -> int:
        return round(self.delay_d / self.dt)

    @classmethod
    def for_delay(cls, delay_d: float) -> "CellDynamics":
        """Dynamics at the synchrony limit: tau = delay_d / 10, dt = tau / 20."""
        return cls(delay_d=delay_d, tau=delay_d / 10, dt=delay_d / 200)


class DynamicsPreset(enum.StrEnum):
    CIRCUIT_1MS = "circuit_1ms"
    MFC_4MIN = "mfc_4min"
    CUSTOM = "custom"

    @classmethod
    def from_text(cls, text: str) -> "DynamicsPreset":
        aliases = {"circuit": cls.CIRCUIT_1MS, "mfc": cls.MFC_4MIN}
        if text in aliases:
            return aliases[text]
        return cls(text)


PRESETS = {
    # Electrical equivalent: 1 ms delay element.
    DynamicsPreset.CIRCUIT_1MS: CellDynamics(delay_d=1e-3, tau=1e-4, dt=5e-6),
    # Fuel cells: 95% settled (3 tau) at 240 s.
    DynamicsPreset.MFC_4MIN: CellDynamics(delay_d=800.0, tau=80.0, dt=4.0),
}


class LatticeConfig(BaseModel):
    """Everything needed to simulate a lattice: geometry, realized rule, calibration and timing."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    width: int
    height: int
    boundary: Boundary = Boundary.DEAD
    neighborhood: Neighborhood = Neighborhood.MOORE
    rule: OuterTotalisticRule = GAME_OF_LIFE
    plan: BandPlan
    calibration: AffineCalibration
    band_params: tuple[BandParams, ...]
    dynamics: CellDynamics
    temperature: float = 0.0

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("The lattice must have positive width and height.")
        if len(self.band_params) != self.plan.cost:
            raise ValueError(f"Expected {self.plan.cost} band parameter sets, got {len(self.band_params)}.")
        if len({(b.p_low, b.p_high) for b in self.band_params}) > 1:
            raise ValueError("All bands must share the same output levels.")
        if self.plan.neighborhood != self.neighborhood:
            raise ValueError("The plan was synthesized for a different neighborhood.")
        if self.temperature < 0:
            raise ValueError("The temperature must be non-negative.")
        return self

    @property
    def p_low(self) -> float:
        return self.band_params[0].p_low if self.band_params else 0.0

    @property
    def p_high(self) -> float:
        return self.band_params[0].p_high if self.band_params else 1.0


@dataclass(frozen=True, eq=False)
class Trace:
    """
    Time-stamped analog outputs.

    Attributes
    ----------
    times : np.ndarray
        Uniformly spaced sample times, shape (n,).
    outputs : np.ndarray
        Cell outputs per sample, shape (n, height, width).
    inputs : np.ndarray, optional
        Cell inputs per sample (volts), same shape as `outputs`.
    targets : np.ndarray, optional
        Level each cell was relaxing towards at every sample.
    """

    times: np.ndarray
    outputs: np.ndarray
    inputs: np.ndarray | None = None
    targets: np.ndarray | None = None

    def __post_init__(self):
        if self.outputs.ndim != 3 or self.outputs.shape[0] != self.times.shape[0]:
            raise ShapeMismatchError(f"Outputs of shape {self.outputs.shape} do not match {self.times.shape[0]} sample times.")
        for extra in (self.inputs, self.targets):
            if extra is not None and extra.shape != self.outputs.shape:
                raise ShapeMismatchError("Trace inputs and targets must have the same shape as its outputs.")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def cell_shape(self) -> tuple[int, int]:
        return self.outputs.shape[1:]

    def index_at(self, t: float) -> int:
        return round((t - self.times[0]) / self.dt)


@dataclass
class EquivalenceReport:
    equal: bool
    first_divergence: tuple[int, list[tuple[int, int]]] | None = None
    steps_compared: int = 0


@dataclass
class SettlingReport:
    max_deviation: float
    """Worst normalized distance between an output and its target at the sampling instants."""
    per_step: list[float] = field(default_factory=list)

    def within(self, tolerance: float = 0.01) -> bool:
        return self.max_deviation <= tolerance


def build_lattice_config(
        rule: OuterTotalisticRule,
        width: int,
        height: int,
        boundary: Boundary = Boundary.DEAD,
        dynamics: CellDynamics = PRESETS[DynamicsPreset.CIRCUIT_1MS],
        volt_window: tuple[float, float] = (2.0, 7.0),
        neighborhood: Neighborhood = Neighborhood.MOORE,
        temperature: float = 0.0,
        p_low: float = 0.0,
        p_high: float = 1.0,
        plan: BandPlan | None = None,
        ) -> LatticeConfig:
    """
    Synthesize (unless a plan is given), verify and calibrate a rule into a lattice configuration.

    Raises
    ------
    UnverifiedPlanError
        When the rule is infeasible, the plan does not realize the rule, or the plan has no band.
    """
    if plan is None:
        plan = synthesize(rule, neighborhood)
    if isinstance(plan, Infeasible):
        raise UnverifiedPlanError(f"Rule {rule.notation} cannot be realized: {plan.reason}")

    report = verify(plan, rule)
    if not report.ok:
        raise UnverifiedPlanError(f"The plan does not realize {rule.notation}. Mismatching (self, outer) pairs: {report.mismatches}")
    if plan.cost == 0:
        raise UnverifiedPlanError(f"Rule {rule.notation} kills every cell; there is no band to calibrate a lattice with.")

    band_params, cal = plan_to_volts(plan, volt_window, p_low, p_high)
    return LatticeConfig(
        width=width,
        height=height,
        boundary=boundary,
        neighborhood=neighborhood,
        rule=rule,
        plan=plan,
        calibration=cal,
        band_params=tuple(band_params),
        dynamics=dynamics,
        temperature=temperature,
    )


def _levels(grid: Grid, config: LatticeConfig) -> np.ndarray:
    return np.where(grid.cells > 0, config.p_high, config.p_low).astype(np.float64)


def _input_bias(y: np.ndarray, config: LatticeConfig) -> np.ndarray:
    return aggregate_lattice(y, config.plan.w_self, config.calibration, config.boundary, config.neighborhood, config.p_low, config.p_high)


def simulate(config: LatticeConfig, initial: Grid, t_end: float) -> Trace:
    """
    Integrate the lattice from `initial` up to `t_end` with explicit fixed steps.

    On [0, delay_d) every cell is held at its initial level. At each edge
    t_k = k * delay_d the band decision of every cell is latched from the
    current outputs and drives dy/dt = (target - y) / tau until the next edge.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}.")
    if initial.shape != (config.height, config.width):
        raise ShapeMismatchError(f"Initial grid is {initial.width}x{initial.height}, the lattice is {config.width}x{config.height}.")
    if not initial.is_binary:
        raise ValueError("The initial grid must be binary.")

    report = verify(config.plan, config.rule)
    if not report.ok:
        raise UnverifiedPlanError(f"The configured plan does not realize {config.rule.notation}: {report.mismatches}")

    dyn = config.dynamics
    n_samples = math.ceil(t_end / dyn.dt - _REL_TOL) + 1
    n_window = dyn.steps_per_delay
    alpha = dyn.dt / dyn.tau

    _logger.info("Simulating a %dx%d lattice for %g s (%d steps, %d per window).", config.width, config.height, t_end, n_samples - 1, n_window)

    shape = (n_samples, config.height, config.width)
    outputs = np.empty(shape)
    inputs = np.empty(shape)
    targets = np.empty(shape)

    y = _levels(initial, config)
    target = y.copy()
    v_in = _input_bias(y, config)

    outputs[0], inputs[0], targets[0] = y, v_in, target
    for k in range(1, n_samples):
        if (k - 1) % n_window == 0 and k > 1:
            target = band_output(v_in, config.band_params, config.temperature)

        y = y + alpha * (target - y)
        v_in = _input_bias(y, config)

        outputs[k], inputs[k], targets[k] = y, v_in, target

    times = np.arange(n_samples) * dyn.dt
    return Trace(times=times, outputs=outputs, inputs=inputs, targets=targets)


def _sample_indices(trace: Trace, config: LatticeConfig, n_steps: int) -> list[int]:
    d = config.dynamics.delay_d
    needed = (n_steps + SAMPLING_PHASE) * d
    if trace.t_end < needed * (1 - _REL_TOL):
        raise TraceTooShortError(f"Sampling {n_steps} steps needs a trace up to {needed:g} s, it ends at {trace.t_end:g} s.")

    return [trace.index_at((n + SAMPLING_PHASE) * d) for n in range(n_steps + 1)]


def sample(trace: Trace, config: LatticeConfig, n_steps: int) -> list[Grid]:
    """Threshold every cell at mid level at t = (n + 0.9) * delay_d, for n = 0..n_steps."""
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}.")

    threshold = (config.p_low + config.p_high) / 2
    return [
        Grid((trace.outputs[i] > threshold).astype(np.uint8), config.boundary)
        for i in _sample_indices(trace, config, n_steps)
    ]


def equivalence_report(sampled: typing.Sequence[Grid], oracle: typing.Sequence[Grid]) -> EquivalenceReport:
    """Cell-exact comparison of two grid sequences, locating the first diverging step."""
    if len(sampled) != len(oracle):
        raise ShapeMismatchError(f"Cannot compare {len(sampled)} sampled grids with {len(oracle)} oracle grids.")

    for n, (s, o) in enumerate(zip(sampled, oracle)):
        if s.shape != o.shape:
            raise ShapeMismatchError(f"Step {n}: sampled grid is {s.width}x{s.height}, oracle is {o.width}x{o.height}.")

        diverging = [(int(r), int(c)) for r, c in zip(*np.nonzero(s.cells != o.cells))]
        if diverging:
            return EquivalenceReport(equal=False, first_divergence=(n, diverging), steps_compared=n + 1)

    return EquivalenceReport(equal=True, steps_compared=len(sampled))


def settling_report(trace: Trace, config: LatticeConfig, n_steps: int) -> SettlingReport:
    """Worst distance of the outputs from their targets at each sampling instant, normalized to the output swing."""
    if trace.targets is None:
        raise ValueError("The trace does not carry targets; it was not produced by `simulate`.")

    swing = config.p_high - config.p_low
    per_step = [
        float(np.abs(trace.outputs[i] - trace.targets[i]).max() / swing)
        for i in _sample_indices(trace, config, n_steps)
    ]
    return SettlingReport(max_deviation=max(per_step), per_step=per_step)
