"""
Transfer functions of a single cellular automaton cell built from a duet of
microbial fuel cells.

Two descriptions of the same cell live here: the phenomenological band
(window) transfer, where the output power is high only for intermediate input
bias, and a mechanistic cascade of a secondary and a primary fuel cell sharing
one substrate stream. The cascade must reduce to the band whenever the feed is
replete.
"""

import enum
import logging
import math
import typing

import numpy as np

from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import expit

from . import MfcLifeError
from .ca_engine import Boundary, Neighborhood, neighbor_sums


_logger = logging.getLogger("mfc_life.transfer_model")


class NonFiniteInputError(MfcLifeError, ValueError):
    ...


class DegenerateBandError(MfcLifeError, ValueError):
    ...


class Region(enum.StrEnum):
    """The three operating regions of a cell, by input bias."""

    LOW = "low"
    WINDOW = "window"
    HIGH = "high"


def _require_finite(name: str, *values: float):
    for value in values:
        if not math.isfinite(value):
            raise NonFiniteInputError(f"{name} must be finite, got {value}.")


class BandParams(BaseModel):
    """
    Thresholds and output levels of the band transfer.

    Attributes
    ----------
    v_thr_low, v_thr_high : float
        Input bias thresholds, in volts. The output is high strictly between them.
    p_low, p_high : float
        Normalized output power outside and inside the band.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    v_thr_low: float
    v_thr_high: float
    p_low: float = 0.0
    p_high: float = 1.0

    def __init__(self, v_thr_low: float, v_thr_high: float, p_low: float = 0.0, p_high: float = 1.0, **kwargs):
        super().__init__(v_thr_low=v_thr_low, v_thr_high=v_thr_high, p_low=p_low, p_high=p_high, **kwargs)

    @model_validator(mode="after")
    def _check_ordering(self):
        if not self.v_thr_low < self.v_thr_high:
            raise ValueError(f"v_thr_low ({self.v_thr_low}) must be lower than v_thr_high ({self.v_thr_high}).")
        if not self.p_low < self.p_high:
            raise ValueError(f"p_low ({self.p_low}) must be lower than p_high ({self.p_high}).")
        return self


class DuetParams(BaseModel):
    """
    Parameters of the two fuel cell cascade realizing one cell.

    The secondary fuel cell is fed first and its effluent feeds the primary,
    whose output power is the cell state. Both third electrodes hang from the
    cell input through r1 (secondary) and r2 (primary); r1 > r2 makes the larger
    drop keep the secondary off for intermediate inputs.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    r1: float
    r2: float
    v_act: float
    s_in: float = 1.0
    s_min: float = 0.5
    tau: float = 80.0
    secondary_uptake: float = 1.0
    """Normalized substrate consumed by an active secondary. The default is total depletion."""

    @model_validator(mode="after")
    def _check_physical(self):
        if not self.r1 > self.r2 > 0:
            raise ValueError(f"Resistances must satisfy r1 > r2 > 0, got r1={self.r1}, r2={self.r2}.")
        if self.v_act <= 0:
            raise ValueError(f"The activation bias must be positive, got {self.v_act}.")
        if not 0 < self.s_min <= self.s_in:
            raise ValueError(f"Substrate levels must satisfy 0 < s_min <= s_in, got s_min={self.s_min}, s_in={self.s_in}.")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}.")
        if self.s_in - self.secondary_uptake >= self.s_min:
            raise ValueError("An active secondary must leave less than s_min in its effluent (increase secondary_uptake).")
        return self


class DuetOutput(typing.NamedTuple):
    power: float
    s_effluent: float


class AffineCalibration(BaseModel):
    """Maps a count-domain total to volts: v = gain_a * total + offset_b."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    gain_a: float
    offset_b: float

    def __init__(self, gain_a: float, offset_b: float, **kwargs):
        super().__init__(gain_a=gain_a, offset_b=offset_b, **kwargs)

    @model_validator(mode="after")
    def _check_gain(self):
        if self.gain_a <= 0:
            raise ValueError(f"gain_a must be positive, got {self.gain_a}.")
        return self

    def __call__(self, count):
        return self.gain_a * count + self.offset_b


IDENTITY_CALIBRATION = AffineCalibration(1.0, 0.0)


def region_of(v_in: float, v_low: float, v_high: float) -> Region:
    """Operating region of an input bias. Threshold values belong to the outer regions."""
    _require_finite("v_in", v_in)
    if v_in <= v_low:
        return Region.LOW
    if v_in >= v_high:
        return Region.HIGH
    return Region.WINDOW


def band_transfer(v_in: float, p: BandParams) -> float:
    """Output power for an input bias: p_high strictly inside (v_thr_low, v_thr_high), p_low elsewhere."""
    if region_of(v_in, p.v_thr_low, p.v_thr_high) == Region.WINDOW:
        return p.p_high
    return p.p_low


def smooth_band_transfer(v_in: float, p: BandParams, temperature: float) -> float:
    """
    Band transfer with logistic edges of width `temperature` (volts).

    At zero temperature this is exactly `band_transfer`; as the temperature
    grows the edges soften and the cell output takes intermediate values near
    the thresholds.
    """
    _require_finite("v_in", v_in)
    if temperature < 0:
        raise ValueError(f"The temperature must be non-negative, got {temperature}.")
    if temperature == 0:
        return band_transfer(v_in, p)

    inside = expit((v_in - p.v_thr_low) / temperature) * expit((p.v_thr_high - v_in) / temperature)
    return float(p.p_low + (p.p_high - p.p_low) * inside)


def band_output(v_in: np.ndarray, bands: typing.Sequence[BandParams], temperature: float = 0.0) -> np.ndarray:
    """
    Vectorized transfer of a union of bands sharing the same output levels.

    Each input lies inside at most one band, so the union is the maximum over
    the individual windows.
    """
    if len(bands) == 0:
        raise ValueError("At least one band is required.")

    v_in = np.asarray(v_in, dtype=np.float64)
    if not np.isfinite(v_in).all():
        raise NonFiniteInputError("Every input bias must be finite.")

    p_low, p_high = bands[0].p_low, bands[0].p_high
    inside = np.zeros_like(v_in)
    for band in bands:
        if (band.p_low, band.p_high) != (p_low, p_high):
            raise ValueError("All bands of a cell must share the same output levels.")

        if temperature == 0:
            window = ((v_in > band.v_thr_low) & (v_in < band.v_thr_high)).astype(np.float64)
        else:
            window = expit((v_in - band.v_thr_low) / temperature) * expit((band.v_thr_high - v_in) / temperature)
        inside = np.maximum(inside, window)

    return p_low + (p_high - p_low) * inside


def duet_output(v_in: float, d: DuetParams, band: BandParams, s_in: float | None = None) -> DuetOutput:
    """
    Mechanistic evaluation of the fuel cell duet.

    The secondary is active for inputs at or above the high threshold; it then
    consumes the substrate and starves the primary. The primary is biased for
    inputs above the low threshold and produces power only while its influent
    carries at least s_min. With neither biased, no power is produced.

    Parameters
    ----------
    s_in : float, optional
        Feed substrate override (e.g. a starved feed). Defaults to the duet's
        nominal feed `d.s_in`.
    """
    _require_finite("v_in", v_in)

    feed = d.s_in if s_in is None else s_in
    _require_finite("s_in", feed)
    if feed < 0:
        raise ValueError(f"The feed substrate cannot be negative, got {feed}.")

    secondary_active = v_in >= band.v_thr_high
    primary_biased = v_in > band.v_thr_low

    if secondary_active:
        return DuetOutput(band.p_low, max(0.0, feed - d.secondary_uptake))

    if primary_biased:
        power = band.p_high if feed >= d.s_min else band.p_low
        return DuetOutput(power, feed)

    return DuetOutput(band.p_low, feed)


def calibrate_affine(count_band: tuple[float, float], volt_band: tuple[float, float]) -> AffineCalibration:
    """Solve a * low_count + b = v_low and a * high_count + b = v_high."""
    low_count, high_count = count_band
    v_low, v_high = volt_band
    _require_finite("Band endpoints", low_count, high_count, v_low, v_high)

    if not low_count < high_count:
        raise DegenerateBandError(f"Count band ({low_count}, {high_count}) must have low < high.")
    if not v_low < v_high:
        raise DegenerateBandError(f"Volt band ({v_low}, {v_high}) must have low < high.")

    gain = (v_high - v_low) / (high_count - low_count)
    return AffineCalibration(gain, v_low - gain * low_count)


def invert_affine(cal: AffineCalibration, volts: float) -> float:
    return (volts - cal.offset_b) / cal.gain_a


def _normalize(outputs, p_low: float, p_high: float):
    return (np.asarray(outputs, dtype=np.float64) - p_low) / (p_high - p_low)


def aggregate_input(
        neighbor_outputs: typing.Sequence[float],
        self_output: float,
        w_self: float,
        cal: AffineCalibration,
        p_low: float = 0.0,
        p_high: float = 1.0,
        neighborhood: Neighborhood = Neighborhood.MOORE,
        ) -> float:
    """
    Input bias of a cell from its neighbors' and its own output power.

    The outputs are normalized to [0, 1] with (p_low, p_high), summed with the
    own output weighted by w_self, and mapped to volts by the calibration.
    Fewer outputs than the neighborhood holds stand for neighbors past a dead edge.
    """
    if len(neighbor_outputs) > neighborhood.max_count:
        raise ValueError(f"A {neighborhood} cell has at most {neighborhood.max_count} neighbors, got {len(neighbor_outputs)} outputs.")

    neighbors = _normalize(neighbor_outputs, p_low, p_high)
    own = float(_normalize(self_output, p_low, p_high))
    if not (np.isfinite(neighbors).all() and math.isfinite(own) and math.isfinite(w_self)):
        raise NonFiniteInputError("Cell outputs and weights must be finite.")

    return float(cal(neighbors.sum() + w_self * own))


def aggregate_lattice(
        outputs: np.ndarray,
        w_self: float,
        cal: AffineCalibration,
        boundary: Boundary = Boundary.DEAD,
        neighborhood: Neighborhood = Neighborhood.MOORE,
        p_low: float = 0.0,
        p_high: float = 1.0,
        ) -> np.ndarray:
    """`aggregate_input` for every cell of a lattice of outputs at once."""
    normalized = _normalize(outputs, p_low, p_high)
    if not np.isfinite(normalized).all():
        raise NonFiniteInputError("Cell outputs must be finite.")

    return cal(neighbor_sums(normalized, boundary, neighborhood) + w_self * normalized)
