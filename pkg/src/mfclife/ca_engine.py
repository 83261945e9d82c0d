"""
Discrete synchronous cellular automaton engine.

This is the reference every analog model in the package is checked against:
a binary lattice updated by an outer-totalistic rule (Game of Life by default).
"""

import enum
import logging
import re
import typing

from dataclasses import dataclass

import numpy as np

from pydantic import BaseModel, ConfigDict, field_validator
from scipy.signal import convolve2d


_logger = logging.getLogger("mfc_life.ca_engine")


class Boundary(enum.StrEnum):
    DEAD = "dead"
    """Cells outside the lattice are permanently dead."""
    TORUS = "torus"
    """Indices wrap around on both axes."""


class Neighborhood(enum.StrEnum):
    MOORE = "moore"
    VON_NEUMANN = "vonneumann"

    @property
    def max_count(self) -> int:
        return 8 if self == Neighborhood.MOORE else 4

    @property
    def offsets(self) -> list[tuple[int, int]]:
        if self == Neighborhood.MOORE:
            return [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]
        return [(-1, 0), (0, -1), (0, 1), (1, 0)]

    @property
    def kernel(self) -> np.ndarray:
        _k = np.zeros((3, 3), dtype=np.int64)
        for dr, dc in self.offsets:
            _k[1 + dr, 1 + dc] = 1
        return _k


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Rectangular lattice of cell states.

    The state array is copied on construction and made read-only, so a Grid
    can be shared freely between threads and never changes after a step.

    Attributes
    ----------
    cells : np.ndarray
        States indexed as (row, col). Binary grids hold 0/1 as uint8,
        continuous grids hold floats.
    boundary : Boundary
        How neighbors outside the lattice are resolved.
    """

    cells: np.ndarray
    boundary: Boundary = Boundary.DEAD

    def __post_init__(self):
        cells = np.array(self.cells, copy=True)
        if cells.ndim != 2 or cells.shape[0] == 0 or cells.shape[1] == 0:
            raise ValueError(f"A grid needs a non-empty 2D state array, got shape {cells.shape}.")

        if cells.dtype == bool or np.issubdtype(cells.dtype, np.integer):
            if not np.isin(cells, (0, 1)).all():
                raise ValueError("Integer grids must be binary (only 0 and 1 states).")
            cells = cells.astype(np.uint8)
        else:
            cells = cells.astype(np.float64)

        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def empty(cls, width: int, height: int, boundary: Boundary = Boundary.DEAD) -> "Grid":
        return cls(np.zeros((height, width), dtype=np.uint8), boundary)

    @classmethod
    def from_cells(cls, width: int, height: int, alive: typing.Iterable[tuple[int, int]], boundary: Boundary = Boundary.DEAD) -> "Grid":
        """Build a binary grid from the (row, col) coordinates of the live cells."""
        cells = np.zeros((height, width), dtype=np.uint8)
        for row, col in alive:
            cells[row, col] = 1
        return cls(cells, boundary)

    @classmethod
    def random(cls, width: int, height: int, density: float = 0.5, seed: int | None = None, boundary: Boundary = Boundary.DEAD) -> "Grid":
        rng = np.random.default_rng(seed)
        return cls((rng.random((height, width)) < density).astype(np.uint8), boundary)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    @property
    def is_binary(self) -> bool:
        return self.cells.dtype == np.uint8

    def alive(self) -> list[tuple[int, int]]:
        return [(int(r), int(c)) for r, c in zip(*np.nonzero(self.cells))]

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.boundary == other.boundary and self.shape == other.shape and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.boundary, self.shape, self.cells.tobytes()))

    def __repr__(self):
        return f"Grid({self.width}x{self.height}, boundary={self.boundary.value}, population={population(self)})"


class OuterTotalisticRule(BaseModel):
    """Birth / survival count sets of an outer-totalistic binary rule."""

    model_config = ConfigDict(frozen=True)

    birth: frozenset[int]
    survival: frozenset[int]

    def __init__(self, birth: typing.Iterable[int], survival: typing.Iterable[int], **kwargs):
        super().__init__(birth=frozenset(birth), survival=frozenset(survival), **kwargs)

    @field_validator("birth", "survival")
    @classmethod
    def _counts_in_range(cls, value: frozenset[int]) -> frozenset[int]:
        out_of_range = sorted(i for i in value if not 0 <= i <= 8)
        if out_of_range:
            raise ValueError(f"Neighbor counts must lie in 0..8, got {out_of_range}.")
        return value

    @property
    def notation(self) -> str:
        birth = "".join(str(i) for i in sorted(self.birth))
        survival = "".join(str(i) for i in sorted(self.survival))
        return f"B{birth}/S{survival}"

    def next_state(self, self_state: int, outer: int) -> int:
        if self_state:
            return int(outer in self.survival)
        return int(outer in self.birth)

    def __str__(self):
        return self.notation


GAME_OF_LIFE = OuterTotalisticRule(birth={3}, survival={2, 3})

_BS_NOTATION = re.compile(r"^\s*B(?P<birth>\d*)\s*/\s*S(?P<survival>\d*)\s*$", re.IGNORECASE)
_BS_COMPACT_NOTATION = re.compile(r"^\s*B(?P<birth>\d*)S(?P<survival>\d*)\s*$", re.IGNORECASE)
_LEGACY_NOTATION = re.compile(r"^\s*(?P<survival>\d*)\s*/\s*(?P<birth>\d*)\s*$")


def parse_rule(text: str) -> OuterTotalisticRule:
    """
    Parse a rule written as 'B3/S23', 'b3s23' or the legacy 'survival/birth' form '23/3'.

    Raises
    ------
    ValueError
        When the text is not a recognized rule notation.
    """
    for pattern in (_BS_NOTATION, _BS_COMPACT_NOTATION, _LEGACY_NOTATION):
        match = pattern.match(text)
        if match is None:
            continue

        birth = [int(i) for i in match.group("birth")]
        survival = [int(i) for i in match.group("survival")]
        return OuterTotalisticRule(birth, survival)

    raise ValueError(f"Could not parse the rule '{text}'. Expected something like 'B3/S23'.")


def neighbor_sums(cells: np.ndarray, boundary: Boundary, neighborhood: Neighborhood = Neighborhood.MOORE) -> np.ndarray:
    """
    Sum of the neighbor states of every cell, excluding the cell itself.

    Works on binary and continuous state arrays alike. The lattice is padded by
    one cell (zeros or wrapped copies) so tiny toroidal lattices count repeated
    neighbors once per offset.
    """
    cells = np.asarray(cells)
    pad_mode = "wrap" if boundary == Boundary.TORUS else "constant"
    padded = np.pad(cells.astype(np.float64), 1, mode=pad_mode)
    sums = convolve2d(padded, neighborhood.kernel.astype(np.float64), mode="valid")

    if cells.dtype.kind == "f":
        return sums
    return np.rint(sums).astype(np.int64)


def outer_sum(grid: Grid, row: int, col: int, neighborhood: Neighborhood = Neighborhood.MOORE) -> int:
    """Live-neighbor count of a single cell."""
    if not (0 <= row < grid.height and 0 <= col < grid.width):
        raise IndexError(f"Cell ({row}, {col}) is outside the {grid.width}x{grid.height} grid.")

    total = 0
    for dr, dc in neighborhood.offsets:
        r, c = row + dr, col + dc
        if grid.boundary == Boundary.TORUS:
            r, c = r % grid.height, c % grid.width
        elif not (0 <= r < grid.height and 0 <= c < grid.width):
            continue
        total += int(grid.cells[r, c])

    return total


def _require_binary(grid: Grid):
    if not grid.is_binary:
        raise ValueError("The discrete engine only accepts binary grids.")


def step(grid: Grid, rule: OuterTotalisticRule = GAME_OF_LIFE, neighborhood: Neighborhood = Neighborhood.MOORE) -> Grid:
    """Apply the rule to every cell simultaneously. The input grid is left untouched."""
    _require_binary(grid)

    counts = neighbor_sums(grid.cells, grid.boundary, neighborhood)
    born = np.isin(counts, sorted(rule.birth))
    survives = np.isin(counts, sorted(rule.survival))

    return Grid(np.where(grid.cells == 1, survives, born).astype(np.uint8), grid.boundary)


def run(grid: Grid, rule: OuterTotalisticRule = GAME_OF_LIFE, steps: int = 1, neighborhood: Neighborhood = Neighborhood.MOORE) -> list[Grid]:
    """Return the generations [g_0, ..., g_steps], with g_0 being the input grid."""
    if steps < 0:
        raise ValueError(f"The number of steps must be non-negative, got {steps}.")

    _logger.debug("Running %s for %d steps on %r.", rule.notation, steps, grid)

    generations = [grid]
    for _ in range(steps):
        generations.append(step(generations[-1], rule, neighborhood))
    return generations


def detect_period(grids: typing.Sequence[Grid]) -> tuple[int, int] | None:
    """
    Find the smallest period p, and for it the first offset o, such that
    g[o + k] == g[o + k + p] for every k that stays inside the sequence.

    Returns
    -------
    (offset, period) or None when no two grids of the sequence repeat.
    """
    if len(grids) == 0:
        raise ValueError("Cannot detect a period on an empty sequence.")

    n = len(grids)
    for period in range(1, n):
        for offset in range(0, n - period):
            if all(grids[i] == grids[i + period] for i in range(offset, n - period)):
                return offset, period
    return None


def population(grid: Grid) -> int:
    return int(np.count_nonzero(grid.cells))
