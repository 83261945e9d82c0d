"""
CSV emission and ingestion of traces, sweeps and sampled states.

Every table is written with a header row, '.' as decimal separator and LF line
endings, so identical runs produce byte-identical files.
"""

import logging
import os
import re
import typing

import numpy as np
import pandas as pd

from .ca_engine import Grid
from .lattice import ShapeMismatchError, Trace


_logger = logging.getLogger("mfc_life.trace_export")

FLOAT_FORMAT = "%.9g"

_CELL_COLUMN = re.compile(r"^cell_(?P<row>\d+)_(?P<col>\d+)$")

Destination = str | os.PathLike | typing.TextIO


def cell_columns(height: int, width: int) -> list[str]:
    """Row-major `cell_r_c` column names."""
    return [f"cell_{r}_{c}" for r in range(height) for c in range(width)]


def _write(frame: pd.DataFrame, destination: Destination, what: str):
    frame.to_csv(destination, index=False, lineterminator="\n", float_format=FLOAT_FORMAT)

    if isinstance(destination, (str, os.PathLike)):
        _logger.info("Wrote %s (%d rows) to '%s'.", what, len(frame), destination)


def trace_to_frame(trace: Trace) -> pd.DataFrame:
    height, width = trace.cell_shape
    frame = pd.DataFrame(trace.outputs.reshape(len(trace.times), -1), columns=cell_columns(height, width))
    frame.insert(0, "time_s", trace.times)
    return frame


def write_trace_csv(trace: Trace, destination: Destination):
    """Columns: time_s, then every cell's output as cell_r_c."""
    _write(trace_to_frame(trace), destination, "a trace")


def read_trace_csv(source: str | os.PathLike | typing.TextIO) -> Trace:
    """
    Load a trace written by `write_trace_csv`.

    Raises
    ------
    ShapeMismatchError
        When the cell columns do not form a full rectangular lattice.
    """
    frame = pd.read_csv(source)
    if "time_s" not in frame.columns:
        raise ShapeMismatchError("The trace table has no 'time_s' column.")

    positions = []
    for name in frame.columns:
        if name == "time_s":
            continue
        match = _CELL_COLUMN.match(name)
        if match is None:
            raise ShapeMismatchError(f"Unexpected column '{name}' in a trace table.")
        positions.append((int(match.group("row")), int(match.group("col"))))

    if not positions:
        raise ShapeMismatchError("The trace table has no cell columns.")

    height = max(r for r, _ in positions) + 1
    width = max(c for _, c in positions) + 1
    expected = cell_columns(height, width)
    if sorted(expected) != sorted(frame.columns.drop("time_s")):
        raise ShapeMismatchError(f"The cell columns do not cover a full {width}x{height} lattice.")

    outputs = frame[expected].to_numpy(dtype=np.float64).reshape(len(frame), height, width)
    return Trace(times=frame["time_s"].to_numpy(dtype=np.float64), outputs=outputs)


def sweep_to_frame(trace: Trace) -> pd.DataFrame:
    if trace.inputs is None or trace.cell_shape != (1, 1):
        raise ShapeMismatchError("A sweep table needs a single-cell trace carrying its inputs.")

    return pd.DataFrame({
        "time_s": trace.times,
        "v_in": trace.inputs[:, 0, 0],
        "v_out": trace.outputs[:, 0, 0],
    })


def write_sweep_csv(trace: Trace, destination: Destination):
    """(time_s, v_in, v_out) triplets of a single-cell sweep, for external plotting."""
    _write(sweep_to_frame(trace), destination, "a sweep")


def states_to_frame(grids: typing.Sequence[Grid]) -> pd.DataFrame:
    if len(grids) == 0:
        raise ValueError("There are no states to tabulate.")

    height, width = grids[0].shape
    if any(g.shape != (height, width) for g in grids):
        raise ShapeMismatchError("Every state must have the same shape.")

    frame = pd.DataFrame(
        np.stack([g.cells.reshape(-1) for g in grids]).astype(np.int64),
        columns=cell_columns(height, width),
    )
    frame.insert(0, "step", np.arange(len(grids)))
    return frame


def write_states_csv(grids: typing.Sequence[Grid], destination: Destination):
    """Columns: step, then every cell's 0/1 state as cell_r_c."""
    _write(states_to_frame(grids), destination, "the sampled states")
