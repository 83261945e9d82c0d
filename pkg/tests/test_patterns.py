import numpy as np
import pytest

from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from mfclife.ca_engine import Boundary, Grid
from mfclife.patterns import (
    PatternFormat,
    PatternParseError,
    load_pattern_file,
    parse_pattern,
    read_pattern,
    render_ascii,
    render_rle,
)


binary_grids = arrays(
    np.uint8,
    array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=32),
    elements=st.integers(0, 1),
).map(Grid)


def test_parse_rle_blinker(blinker_rle):
    grid = parse_pattern(blinker_rle)

    assert grid.shape == (1, 3)
    assert grid.cells.tolist() == [[1, 1, 1]]


def test_parse_rle_block(block_rle, block_grid):
    assert parse_pattern(block_rle, width=4, height=4, offset=(1, 1)) == block_grid


def test_parse_rle_glider(glider_rle, glider_grid):
    pattern = read_pattern(glider_rle)

    assert pattern.rule.notation == "B3/S23"
    assert pattern.comments[0] == "#N Glider"
    assert len(pattern.comments) == 2
    assert pattern.place(16, 16, boundary=Boundary.TORUS) == glider_grid


def test_parse_rle_multi_line_and_row_runs():
    text = "x = 4, y = 4\n" "o2$\n" "3bo!"
    grid = parse_pattern(text)

    assert grid.alive() == [(0, 0), (2, 3)]


def test_parse_rle_trailing_empty_rows():
    assert parse_pattern("x = 3, y = 1\n3o$!").cells.tolist() == [[1, 1, 1]]


def test_parse_plaintext(vertical_blinker_plaintext, blinker_grid):
    grid = parse_pattern(vertical_blinker_plaintext)

    assert grid == Grid.from_cells(3, 3, [(0, 1), (1, 1), (2, 1)])
    assert grid != blinker_grid


def test_parse_plaintext_comments(block_plaintext, block_grid):
    pattern = read_pattern(block_plaintext)

    assert pattern.comments == ["!Name: Block", "!"]
    assert pattern.rule is None
    assert pattern.place(4, 4, offset=(1, 1)) == block_grid


def test_pattern_declared_rule(glider_rle, highlife_replicator_rle, blinker_rle, block_plaintext):
    assert read_pattern(glider_rle).rule.notation == "B3/S23"
    assert read_pattern(highlife_replicator_rle).rule.notation == "B36/S23"
    assert read_pattern(blinker_rle).rule is None
    assert read_pattern(block_plaintext).rule is None


def test_highlife_replicator(highlife_replicator_rle):
    grid = parse_pattern(highlife_replicator_rle)

    assert grid.shape == (5, 5)
    assert grid.alive()[:3] == [(0, 2), (0, 3), (0, 4)]
    assert int(grid.cells.sum()) == 12


@pytest.mark.parametrize("text, line, column", [
    ("x = 3, y = 1\n3q!", 2, 2),
    ("x = 2, y = 1\n3o!", 2, 1),
    ("x = 3, y = 1\n3o", 2, 3),
    ("x = 3, y = 1\n0o!", 2, 1),
    ("x = 3, y = 1\n3 o!", 2, 2),
    ("x = 3, y = 1\n3o$3o!", 1, 1),
    ("x = 3, y = 1, rule = B9/S2\n3o!", 1, 22),
    ("#C no header\n3o!", 2, 1),
    ("x = 3, y = 1\n1000000000000o!", 2, 1),
    ("x = 3, y = 1\no1000000000000$!", 2, 2),
    ("x = 3, y = 2\n2o2bo!", 2, 3),
    ("x = 3, y = 1\n3o2$!", 2, 3),
])
def test_rle_errors_point_at_the_problem(text, line, column):
    with pytest.raises(PatternParseError) as e:
        read_pattern(text, PatternFormat.RLE)

    assert (e.value.line, e.value.column) == (line, column)
    assert str(e.value).startswith(f"{line}:{column}: ")


@pytest.mark.parametrize("text, line, column", [
    (".O.\n.X.", 2, 2),
    (".O.\n.O", 2, 3),
])
def test_plaintext_errors_point_at_the_problem(text, line, column):
    with pytest.raises(PatternParseError) as e:
        read_pattern(text, PatternFormat.PLAINTEXT)

    assert (e.value.line, e.value.column) == (line, column)


def test_plaintext_without_cells():
    with pytest.raises(PatternParseError):
        read_pattern("!only a comment\n", PatternFormat.PLAINTEXT)


def test_placement(blinker_rle):
    grid = parse_pattern(blinker_rle, width=5, height=5, offset=(2, 1))

    assert grid.alive() == [(2, 1), (2, 2), (2, 3)]

    with pytest.raises(ValueError):
        parse_pattern(blinker_rle, width=2, height=5)
    with pytest.raises(ValueError):
        parse_pattern(blinker_rle, offset=(-1, 0))


def test_pattern_format_from_path():
    assert PatternFormat.from_path("glider.rle") == PatternFormat.RLE
    assert PatternFormat.from_path("blinker.CELLS") == PatternFormat.PLAINTEXT
    assert PatternFormat.from_path("block.txt") == PatternFormat.PLAINTEXT

    with pytest.raises(PatternParseError):
        PatternFormat.from_path("glider.lif")


def test_pattern_format_sniff(glider_rle, block_plaintext):
    assert PatternFormat.sniff(glider_rle) == PatternFormat.RLE
    assert PatternFormat.sniff(block_plaintext) == PatternFormat.PLAINTEXT


def test_load_pattern_file(blinker_cells_file, blinker_grid):
    pattern = load_pattern_file(blinker_cells_file)

    assert pattern.comments == ["!Name: Blinker"]
    assert pattern.place() == blinker_grid


def test_load_missing_pattern_file(tmp_path):
    with pytest.raises(PatternParseError):
        load_pattern_file(tmp_path / "missing.cells")


def test_render_ascii(blinker_grid):
    assert render_ascii(blinker_grid) == "...\nOOO\n..."


def test_render_rejects_continuous_grid():
    grid = Grid(np.full((2, 2), 0.5))

    with pytest.raises(ValueError):
        render_ascii(grid)
    with pytest.raises(ValueError):
        render_rle(grid)


@settings(max_examples=100)
@given(binary_grids)
def test_render_ascii_reads_back(grid):
    assert parse_pattern(render_ascii(grid), PatternFormat.PLAINTEXT) == grid


def test_render_rle_blinker(blinker_grid):
    assert render_rle(blinker_grid) == "x = 3, y = 3\n$3o!"


def test_render_rle_glider(glider_rle, gol_rule):
    glider = parse_pattern(glider_rle)

    assert render_rle(glider, gol_rule) == "x = 3, y = 3, rule = B3/S23\nbo$2bo$3o!"


def test_render_rle_collapses_empty_rows():
    grid = Grid.from_cells(3, 5, [(0, 0), (3, 2)])

    assert render_rle(grid) == "x = 3, y = 5\no3$2bo!"


def test_render_rle_empty_grid():
    assert render_rle(Grid.empty(4, 2)) == "x = 4, y = 2\n!"


def test_render_rle_wraps_long_lines():
    cells = np.zeros((1, 200), dtype=np.uint8)
    cells[0, ::2] = 1
    text = render_rle(Grid(cells))

    assert all(len(line) <= 70 for line in text.splitlines())
    assert parse_pattern(text) == Grid(cells)


def test_render_ascii_small_grids():
    assert render_ascii(Grid.empty(2, 2)) == "..\n.."
    assert render_ascii(Grid(np.ones((2, 2), dtype=np.uint8))) == "OO\nOO"
