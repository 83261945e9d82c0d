"""
Pattern files: RLE and plaintext (.cells) parsing and rendering.
"""

import enum
import itertools
import logging
import re
import typing

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import MfcLifeError
from .ca_engine import Boundary, Grid, OuterTotalisticRule, parse_rule


_logger = logging.getLogger("mfc_life.patterns")

RLE_LINE_WIDTH = 70

_RLE_HEADER = re.compile(
    r"^\s*x\s*=\s*(?P<x>\d+)\s*,\s*y\s*=\s*(?P<y>\d+)\s*(?:,\s*rule\s*=\s*(?P<rule>\S+))?\s*$",
    re.IGNORECASE,
)


class PatternParseError(MfcLifeError, ValueError):
    """
    Malformed pattern text.

    Attributes
    ----------
    line, column : int or None
        1-based position of the offending character in the original text,
        when the error can be tied to one.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None and column is None:
            column = 1
        self.line = line
        self.column = column

        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class PatternFormat(enum.StrEnum):
    RLE = "rle"
    PLAINTEXT = "plaintext"

    @classmethod
    def from_path(cls, path: str | Path) -> "PatternFormat":
        suffix = Path(path).suffix.lower()
        match suffix:
            case ".rle":
                return cls.RLE
            case ".cells" | ".txt":
                return cls.PLAINTEXT
            case _:
                raise PatternParseError(f"Cannot infer the pattern format of '{path}'. Use a .rle or .cells file, or declare the format.")

    @classmethod
    def sniff(cls, text: str) -> "PatternFormat":
        """Guess the format of inline text: an `x = ...` header means RLE."""
        for line in text.splitlines():
            if line.strip() == "" or line.lstrip().startswith("#"):
                continue
            return cls.RLE if _RLE_HEADER.match(line) else cls.PLAINTEXT
        return cls.PLAINTEXT


@dataclass
class Pattern:
    """A parsed pattern, before being placed on a lattice."""

    cells: np.ndarray
    rule: OuterTotalisticRule | None = None
    comments: list[str] = field(default_factory=list)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def place(
            self,
            width: int | None = None,
            height: int | None = None,
            offset: tuple[int, int] = (0, 0),
            boundary: Boundary = Boundary.DEAD,
            ) -> Grid:
        """Put the pattern at `offset` (row, col) on a dead lattice of the given size."""
        row, col = offset
        if row < 0 or col < 0:
            raise ValueError(f"The pattern offset must be non-negative, got {offset}.")

        width = self.width + col if width is None else width
        height = self.height + row if height is None else height
        if col + self.width > width or row + self.height > height:
            raise ValueError(f"A {self.width}x{self.height} pattern at offset {offset} does not fit in a {width}x{height} grid.")

        cells = np.zeros((height, width), dtype=np.uint8)
        cells[row:row + self.height, col:col + self.width] = self.cells
        return Grid(cells, boundary)


def _read_rle(text: str) -> Pattern:
    lines = text.splitlines()
    comments = []

    header_index = None
    for index, line in enumerate(lines):
        stripped = line.strip()
        if stripped == "":
            continue
        if stripped.startswith("#"):
            comments.append(stripped)
            continue
        header_index = index
        break

    if header_index is None:
        raise PatternParseError("Missing the RLE header ('x = W, y = H').", line=max(len(lines), 1))

    header = _RLE_HEADER.match(lines[header_index])
    if header is None:
        raise PatternParseError("Expected an RLE header like 'x = 3, y = 1'.", line=header_index + 1)

    width, height = int(header.group("x")), int(header.group("y"))
    rule = None
    if header.group("rule") is not None:
        try:
            rule = parse_rule(header.group("rule"))
        except ValueError as e:
            column = lines[header_index].index(header.group("rule")) + 1
            raise PatternParseError(str(e), line=header_index + 1, column=column) from e

    rows: list[list[int]] = [[]]
    count_text, count_column = "", None
    terminated = False

    for index in range(header_index + 1, len(lines)):
        line_no = index + 1
        line = lines[index]
        if line.lstrip().startswith("#"):
            continue

        for column, char in enumerate(line, start=1):
            if char.isdigit():
                if count_text == "":
                    count_column = column
                count_text += char
                continue

            if char.isspace():
                if count_text:
                    raise PatternParseError("A run count must be directly followed by its tag.", line_no, column)
                continue

            run = int(count_text) if count_text else 1
            if run == 0:
                raise PatternParseError("Run counts must be positive.", line_no, count_column)
            run_column = count_column if count_text else column
            count_text = ""

            if char in "bo" and len(rows[-1]) + run > width:
                raise PatternParseError(f"Row {len(rows)} would have {len(rows[-1]) + run} cells, but the header declares x = {width}.", line_no, run_column)
            if char == "$" and len(rows) + run > height + 1:
                raise PatternParseError(f"Row {len(rows) + run} is past the y = {height} declared by the header.", line_no, run_column)

            match char:
                case "b":
                    rows[-1].extend([0] * run)
                case "o":
                    rows[-1].extend([1] * run)
                case "$":
                    rows.extend([] for _ in range(run))
                case "!":
                    terminated = True
                case _:
                    raise PatternParseError(f"Unexpected character '{char}' (expected b, o, $ or !).", line_no, column)

            if terminated:
                break

        if count_text:
            raise PatternParseError("Run count without a tag at the end of the line.", line_no, count_column)
        if terminated:
            break

    if not terminated:
        last = len(lines)
        raise PatternParseError("Missing the '!' terminator.", last, len(lines[-1]) + 1 if lines else 1)

    while len(rows) > height and len(rows[-1]) == 0:
        rows.pop()
    if len(rows) > height:
        raise PatternParseError(f"The pattern has {len(rows)} rows, but the header declares y = {height}.", header_index + 1)

    cells = np.zeros((height, width), dtype=np.uint8)
    for r, row in enumerate(rows):
        cells[r, :len(row)] = row

    return Pattern(cells, rule, comments)


def _read_plaintext(text: str) -> Pattern:
    comments = []
    rows = []
    width = None

    lines = text.splitlines()
    while lines and lines[-1].strip() == "":
        lines.pop()

    for line_no, line in enumerate(lines, start=1):
        if line.startswith("!"):
            comments.append(line)
            continue

        line = line.rstrip("\r")
        if line == "" and not rows:
            continue

        for column, char in enumerate(line, start=1):
            if char not in ".O":
                raise PatternParseError(f"Unexpected character '{char}' (expected '.' or 'O').", line_no, column)

        if width is None:
            width = len(line)
        elif len(line) != width:
            raise PatternParseError(f"Row has {len(line)} cells, previous rows have {width}.", line_no, min(len(line), width) + 1)

        rows.append([1 if char == "O" else 0 for char in line])

    if not rows or width == 0:
        raise PatternParseError("The pattern has no cells.")

    return Pattern(np.array(rows, dtype=np.uint8), None, comments)


def read_pattern(text: str, fmt: PatternFormat | None = None) -> Pattern:
    """Parse pattern text without placing it. The format is sniffed when not given."""
    fmt = PatternFormat.sniff(text) if fmt is None else PatternFormat(fmt)

    pattern = _read_rle(text) if fmt == PatternFormat.RLE else _read_plaintext(text)
    _logger.debug("Read a %dx%d %s pattern with %d live cells.", pattern.width, pattern.height, fmt, int(pattern.cells.sum()))
    return pattern


def parse_pattern(
        text: str,
        fmt: PatternFormat | None = None,
        width: int | None = None,
        height: int | None = None,
        offset: tuple[int, int] = (0, 0),
        boundary: Boundary = Boundary.DEAD,
        ) -> Grid:
    """
    Parse RLE or plaintext and place the pattern on a dead lattice.

    Without an explicit size the lattice is just large enough for the pattern
    at its offset.

    Raises
    ------
    PatternParseError
        On malformed text, with the line and column of the problem.
    """
    return read_pattern(text, fmt).place(width, height, offset, boundary)


def load_pattern_file(path: str | Path, fmt: PatternFormat | None = None) -> Pattern:
    path = Path(path)
    if fmt is None:
        fmt = PatternFormat.from_path(path)

    try:
        text = path.read_text()
    except OSError as e:
        raise PatternParseError(f"Could not read the pattern file '{path}': {e.strerror}.") from e

    _logger.debug("Loading pattern from '%s' as %s.", path, fmt)
    return read_pattern(text, fmt)


def render_ascii(grid: Grid) -> str:
    """Rows of '.' and 'O', separated by newlines (no trailing newline)."""
    if not grid.is_binary:
        raise ValueError("Only binary grids can be rendered.")
    return "\n".join("".join("O" if c else "." for c in row) for row in grid.cells)


def _wrap_tokens(tokens: typing.Iterable[str], line_width: int) -> list[str]:
    lines = [""]
    for token in tokens:
        if len(lines[-1]) + len(token) > line_width:
            lines.append("")
        lines[-1] += token
    return lines


def render_rle(grid: Grid, rule: OuterTotalisticRule | None = None) -> str:
    """
    Standard run-length encoding: trailing dead cells of a row and trailing
    empty rows are omitted, runs of empty rows collapse into one `n$` token.
    """
    if not grid.is_binary:
        raise ValueError("Only binary grids can be rendered.")

    header = f"x = {grid.width}, y = {grid.height}"
    if rule is not None:
        header += f", rule = {rule.notation}"

    tokens = []
    pending_rows = 0
    for r, row in enumerate(grid.cells):
        if r > 0:
            pending_rows += 1

        runs = [(int(state), len(list(group))) for state, group in itertools.groupby(row)]
        if runs and runs[-1][0] == 0:
            runs.pop()
        if not runs:
            continue

        if pending_rows:
            tokens.append(f"{pending_rows if pending_rows > 1 else ''}$")
            pending_rows = 0
        for state, run in runs:
            tokens.append(f"{run if run > 1 else ''}{'o' if state else 'b'}")
    tokens.append("!")

    return "\n".join([header, *_wrap_tokens(tokens, RLE_LINE_WIDTH)])
