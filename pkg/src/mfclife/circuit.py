"""
Behavioral model of the three-transistor electrical equivalent of a cell.

Q1-Q2 pull the output high when the input is above the low threshold, Q3 when
it is below the high threshold; their collectors are tied together, forming a
wired AND. The result is the same window function as the fuel cell duet.
"""

import logging
import math

from dataclasses import dataclass, field

import numpy as np

from pydantic import BaseModel, ConfigDict, model_validator

from .ca_engine import GAME_OF_LIFE, Boundary, Grid, detect_period, run
from .lattice import SAMPLING_PHASE, CellDynamics, Trace, build_lattice_config, equivalence_report, sample, simulate
from .transfer_model import BandParams, NonFiniteInputError, Region, region_of


_logger = logging.getLogger("mfc_life.circuit")

BLINKER_STEPS = 10


class CircuitCellParams(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    v_low: float = 2.0
    v_high: float = 7.0
    v_out_high: float = 1.0
    v_out_low: float = 0.0
    delay_d: float = 1e-3

    @model_validator(mode="after")
    def _check_levels(self):
        if not self.v_low < self.v_high:
            raise ValueError(f"v_low ({self.v_low}) must be lower than v_high ({self.v_high}).")
        if not self.v_out_low < self.v_out_high:
            raise ValueError(f"v_out_low ({self.v_out_low}) must be lower than v_out_high ({self.v_out_high}).")
        if self.delay_d <= 0:
            raise ValueError("delay_d must be positive.")
        return self

    def as_band_params(self) -> BandParams:
        return BandParams(self.v_low, self.v_high, self.v_out_low, self.v_out_high)


def window_comparator(v_in: float, p: CircuitCellParams) -> float:
    """Output voltage of the cell circuit for a given input voltage."""
    if not math.isfinite(v_in):
        raise NonFiniteInputError(f"v_in must be finite, got {v_in}.")

    above_low = v_in > p.v_low  # Q1-Q2
    below_high = v_in < p.v_high  # Q3
    return p.v_out_high if (above_low and below_high) else p.v_out_low


def circuit_region(v_in: float, p: CircuitCellParams) -> Region:
    return region_of(v_in, p.v_low, p.v_high)


def sinusoid_sweep(amplitude: float, offset: float, freq: float, t_end: float, dt: float, p: CircuitCellParams) -> Trace:
    """Drive a single cell with offset + amplitude * sin(2 pi f t), sampled every dt on [0, t_end]."""
    if amplitude <= 0:
        raise ValueError(f"The amplitude must be positive, got {amplitude}.")
    if freq < 0:
        raise ValueError(f"The frequency must not be negative, got {freq}.")
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive.")

    n = round(t_end / dt)
    if abs(n * dt - t_end) > 1e-9 * t_end:
        raise ValueError(f"dt ({dt}) must divide t_end ({t_end}).")

    times = np.arange(n + 1) * dt
    v_in = offset + amplitude * np.sin(2 * np.pi * freq * times)
    v_out = np.where((v_in > p.v_low) & (v_in < p.v_high), p.v_out_high, p.v_out_low)

    _logger.debug("Swept %d samples, %d inside the window.", n + 1, int(np.count_nonzero(v_out == p.v_out_high)))
    return Trace(times=times, outputs=v_out.reshape(-1, 1, 1), inputs=v_in.reshape(-1, 1, 1))


def _crossings(level: float, amplitude: float, offset: float, freq: float, t_end: float) -> list[float]:
    x = (level - offset) / amplitude
    if not -1 < x < 1 or freq == 0:
        return []

    omega = 2 * math.pi * freq
    first = math.asin(x)
    crossings = []
    for k in range(-1, math.ceil(freq * t_end) + 2):
        for phase in (first, math.pi - first):
            t = (phase + 2 * math.pi * k) / omega
            if 0 < t < t_end:
                crossings.append(t)
    return crossings


def analytic_window_intervals(amplitude: float, offset: float, freq: float, t_end: float, p: CircuitCellParams) -> list[tuple[float, float]]:
    """
    Closed-form intervals of [0, t_end] during which the sinusoid lies strictly
    inside (v_low, v_high). A zero frequency is a constant input at `offset`: the whole span or nothing.
    """
    if freq < 0:
        raise ValueError(f"The frequency must not be negative, got {freq}.")

    events = sorted({0.0, t_end, *_crossings(p.v_low, amplitude, offset, freq, t_end), *_crossings(p.v_high, amplitude, offset, freq, t_end)})

    intervals = []
    for start, stop in zip(events, events[1:]):
        middle = offset + amplitude * math.sin(2 * math.pi * freq * (start + stop) / 2)
        if not p.v_low < middle < p.v_high:
            continue
        if intervals and intervals[-1][1] == start:
            intervals[-1] = (intervals[-1][0], stop)
        else:
            intervals.append((start, stop))
    return intervals


def sweep_mismatches(trace: Trace, intervals: list[tuple[float, float]], p: CircuitCellParams, tolerance: float) -> list[float]:
    """
    Sample times where the swept output disagrees with the closed-form
    intervals, ignoring samples within `tolerance` of a crossing.
    """
    times = trace.times
    high = trace.outputs[:, 0, 0] == p.v_out_high

    expected = np.zeros_like(high)
    near_edge = np.zeros_like(high)
    for start, stop in intervals:
        expected |= (times > start) & (times < stop)
        for edge in (start, stop):
            near_edge |= np.abs(times - edge) <= tolerance

    return [float(t) for t in times[(high != expected) & ~near_edge]]


def cell_name(row: int, col: int, width: int = 3) -> str:
    """Row-major cell label, X1 being the north-west corner."""
    return f"X{row * width + col + 1}"


@dataclass
class BlinkerReport:
    samples: list[Grid]
    sample_times: list[float]
    center_constant: bool
    antiphase: bool
    """X2 (north) and X4 (west) alternate and are never high at the same sample."""
    period: tuple[int, int] | None
    matches_oracle: bool
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.center_constant and self.antiphase and self.matches_oracle and self.period is not None and self.period[1] == 2

    def lines(self) -> list[str]:
        status = []
        status.append("center constant" if self.center_constant else "center NOT constant")
        status.append("X2/X4 antiphase" if self.antiphase else "X2/X4 NOT antiphase")
        render = ["; ".join(status)]
        render.append(f"period: {self.period[1]} (offset {self.period[0]})" if self.period else "period: none")
        render.append("sampled sequence matches the discrete automaton" if self.matches_oracle else "sampled sequence DIVERGES from the discrete automaton")
        render.extend(self.notes)
        return render


def blinker_demo(p: CircuitCellParams = CircuitCellParams(), n_steps: int = BLINKER_STEPS) -> tuple[Trace, BlinkerReport]:
    """
    3x3 lattice of circuit cells started as a horizontal blinker (X4, X5, X6 high).

    The lattice runs the Game of Life plan calibrated onto the (v_low, v_high)
    window with the circuit's delay, and is sampled once per delay.
    """
    config = build_lattice_config(
        GAME_OF_LIFE,
        3,
        3,
        Boundary.DEAD,
        dynamics=CellDynamics.for_delay(p.delay_d),
        volt_window=(p.v_low, p.v_high),
        p_low=p.v_out_low,
        p_high=p.v_out_high,
    )
    initial = Grid.from_cells(3, 3, [(1, 0), (1, 1), (1, 2)])

    trace = simulate(config, initial, (n_steps + SAMPLING_PHASE) * p.delay_d)
    samples = sample(trace, config, n_steps)
    oracle = run(initial, GAME_OF_LIFE, n_steps)

    north = [int(g.cells[0, 1]) for g in samples]  # X2
    west = [int(g.cells[1, 0]) for g in samples]  # X4
    center = [int(g.cells[1, 1]) for g in samples]  # X5

    never_both = not any(n and w for n, w in zip(north, west))
    alternating = all(a != b for a, b in zip(west, west[1:])) and all(a != b for a, b in zip(north, north[1:]))

    report = BlinkerReport(
        samples=samples,
        sample_times=[(n + SAMPLING_PHASE) * p.delay_d for n in range(n_steps + 1)],
        center_constant=all(center),
        antiphase=never_both and alternating,
        period=detect_period(samples),
        matches_oracle=equivalence_report(samples, oracle).equal,
    )

    for n, g in enumerate(samples):
        high = [cell_name(r, c) for r, c in g.alive()]
        report.notes.append(f"t = {report.sample_times[n] * 1e3:.1f} ms: {' '.join(high) or 'none'} high")

    _logger.info("Blinker demo finished: %s.", "; ".join(report.lines()[:1]))
    return trace, report
