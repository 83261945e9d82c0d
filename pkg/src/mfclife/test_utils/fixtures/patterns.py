import pytest

from mfclife.ca_engine import GAME_OF_LIFE, Boundary, Grid
from mfclife.rule_synth import BandPlan

from ..data import *


@pytest.fixture
def gol_rule():
    return GAME_OF_LIFE


@pytest.fixture
def gol_plan():
    return BandPlan(0.5, [(2.25, 3.75)])


@pytest.fixture
def blinker_grid():
    """Horizontal blinker in the middle row of a 3x3 dead-boundary lattice."""
    return Grid.from_cells(3, 3, [(1, 0), (1, 1), (1, 2)])


@pytest.fixture
def block_grid():
    """2x2 block in the middle of a 4x4 dead-boundary lattice."""
    return Grid.from_cells(4, 4, [(1, 1), (1, 2), (2, 1), (2, 2)])


@pytest.fixture
def glider_grid():
    """South-east moving glider in the corner of a 16x16 torus."""
    return Grid.from_cells(16, 16, [(0, 1), (1, 2), (2, 0), (2, 1), (2, 2)], Boundary.TORUS)


@pytest.fixture
def blinker_cells_file(tmp_path):
    path = tmp_path / "blinker.cells"
    path.write_text("!Name: Blinker\n...\nOOO\n...\n")
    return path
