"""
Compile outer-totalistic rules into band plans for window-transfer cells.

A cell sees the total `outer + w_self * self`. A plan is a self weight plus a
list of open count-space bands; the cell turns on iff its total falls inside
one of them. With w_self = 0.5 the totals of live and dead cells interleave
(integers for dead cells, half-integers for live ones), which lets a single
band express Game of Life's "stay alive on 2" without any extra memory.
"""

import logging
import typing

from dataclasses import dataclass, field

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from . import MfcLifeError
from .ca_engine import Neighborhood, OuterTotalisticRule
from .transfer_model import AffineCalibration, BandParams, calibrate_affine


_logger = logging.getLogger("mfc_life.rule_synth")

SELF_WEIGHTS = (0.0, 0.5)
"""Self weights tried by the synthesizer, in tie-breaking order."""


class EmptyPlanError(MfcLifeError, ValueError):
    ...


class BandPlan(BaseModel):
    """
    A synthesized realization of a rule.

    Attributes
    ----------
    w_self : float
        Weight of the cell's own output in its input total (0 or 0.5).
    bands : tuple of (lo, hi)
        Sorted, disjoint open intervals in count space.
    neighborhood : Neighborhood
        Neighborhood the plan was built for, fixing the achievable totals.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    w_self: float
    bands: tuple[tuple[float, float], ...]
    neighborhood: Neighborhood = Neighborhood.MOORE

    def __init__(self, w_self: float, bands: typing.Iterable[tuple[float, float]], neighborhood: Neighborhood = Neighborhood.MOORE, **kwargs):
        super().__init__(w_self=w_self, bands=tuple(tuple(b) for b in bands), neighborhood=neighborhood, **kwargs)

    @field_validator("w_self")
    @classmethod
    def _supported_weight(cls, value: float) -> float:
        if value not in SELF_WEIGHTS:
            raise ValueError(f"w_self must be one of {SELF_WEIGHTS}, got {value}.")
        return value

    @model_validator(mode="after")
    def _sorted_disjoint(self):
        previous_hi = None
        for lo, hi in self.bands:
            if not lo < hi:
                raise ValueError(f"Band ({lo}, {hi}) must have lo < hi.")
            if previous_hi is not None and lo < previous_hi:
                raise ValueError("Bands must be sorted and disjoint.")
            previous_hi = hi
        return self

    @property
    def cost(self) -> int:
        return len(self.bands)

    def total(self, self_state: int, outer: int) -> float:
        return outer + self.w_self * self_state

    def accepts(self, total: float) -> bool:
        return any(lo < total < hi for lo, hi in self.bands)

    def describe(self) -> str:
        bands = ", ".join(f"({lo:g}, {hi:g})" for lo, hi in self.bands) or "none"
        return f"w_self = {self.w_self:g}, bands = {bands}, cost = {self.cost}"


@dataclass(frozen=True)
class Infeasible:
    """No band plan with a supported self weight realizes the rule."""

    rule: OuterTotalisticRule
    reason: str


@dataclass
class VerifyReport:
    ok: bool
    mismatches: list[tuple[int, int]] = field(default_factory=list)
    """(self_state, outer_count) pairs where the plan and the rule disagree."""
    checked: int = 0


def achievable_totals(w_self: float, neighborhood: Neighborhood = Neighborhood.MOORE) -> list[float]:
    """Every value `outer + w_self * self` can take, sorted and without repeats."""
    return sorted({n + w_self * s for s in (0, 1) for n in range(neighborhood.max_count + 1)})


def _classify_totals(rule: OuterTotalisticRule, w_self: float, neighborhood: Neighborhood) -> tuple[set[float], set[float]]:
    accept, reject = set(), set()
    for s in (0, 1):
        for n in range(neighborhood.max_count + 1):
            (accept if rule.next_state(s, n) else reject).add(n + w_self * s)
    return accept, reject


def _cover(totals: list[float], accept: set[float]) -> list[tuple[float, float]]:
    """Minimal bands covering runs of consecutive accepted totals, with endpoints at midpoints."""
    spacing = totals[1] - totals[0]
    bands = []

    i = 0
    while i < len(totals):
        if totals[i] not in accept:
            i += 1
            continue

        j = i
        while j + 1 < len(totals) and totals[j + 1] in accept:
            j += 1

        lo = (totals[i - 1] + totals[i]) / 2 if i > 0 else totals[i] - spacing / 2
        hi = (totals[j] + totals[j + 1]) / 2 if j + 1 < len(totals) else totals[j] + spacing / 2
        bands.append((lo, hi))

        i = j + 1

    return bands


def synthesize(rule: OuterTotalisticRule, neighborhood: Neighborhood = Neighborhood.MOORE) -> BandPlan | Infeasible:
    """
    Find the cheapest band plan realizing `rule`.

    Every supported self weight is tried; for each one the accepted and rejected
    totals are computed and, if they do not collide, covered by the fewest bands.
    Fewer bands win, ties go to w_self = 0.
    """
    candidates = []
    for w_self in SELF_WEIGHTS:
        accept, reject = _classify_totals(rule, w_self, neighborhood)
        if accept & reject:
            _logger.debug("%s: w_self=%g collides on totals %s.", rule.notation, w_self, sorted(accept & reject))
            continue

        bands = _cover(achievable_totals(w_self, neighborhood), accept)
        candidates.append(BandPlan(w_self, bands, neighborhood))

    if len(candidates) == 0:
        return Infeasible(rule, f"Accepted and rejected totals collide for every self weight in {SELF_WEIGHTS}.")

    plan = min(candidates, key=lambda p: (p.cost, p.w_self))
    _logger.debug("%s synthesized into %s.", rule.notation, plan.describe())
    return plan


def verify(plan: BandPlan, rule: OuterTotalisticRule) -> VerifyReport:
    """Check the plan against the rule on every (self_state, outer_count) pair."""
    mismatches = []
    checked = 0
    for s in (0, 1):
        for n in range(plan.neighborhood.max_count + 1):
            checked += 1
            if int(plan.accepts(plan.total(s, n))) != rule.next_state(s, n):
                mismatches.append((s, n))

    return VerifyReport(ok=len(mismatches) == 0, mismatches=mismatches, checked=checked)


def endpoint_margin(plan: BandPlan) -> float:
    """Smallest distance between a band endpoint and an achievable total (inf for an empty plan)."""
    totals = achievable_totals(plan.w_self, plan.neighborhood)
    return min((abs(e - t) for band in plan.bands for e in band for t in totals), default=float("inf"))


def plan_to_volts(
        plan: BandPlan,
        volt_band_for_first: tuple[float, float],
        p_low: float = 0.0,
        p_high: float = 1.0,
        ) -> tuple[list[BandParams], AffineCalibration]:
    """
    Calibrate the first band onto a volt window and map the rest through the same transform.

    Raises
    ------
    EmptyPlanError
        When the plan has no band to calibrate against.
    """
    if plan.cost == 0:
        raise EmptyPlanError("A plan without bands cannot be mapped to volts.")

    cal = calibrate_affine(plan.bands[0], volt_band_for_first)
    band_params = [BandParams(cal(lo), cal(hi), p_low, p_high) for lo, hi in plan.bands]
    return band_params, cal
