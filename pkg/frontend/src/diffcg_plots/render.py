"""Read MSD learning-curve CSVs and render them as figures.

The input contract is the simulator's CSV schema only: a header row
`iter,<label1>,<label2>,...` followed by one row per time instant whose
cells are finite reals (MSD in dB). Nothing here imports the simulator;
the CSV bytes are the entire interface.

Rendering is a pure function of the CSV content and the plot options:
identical inputs produce identical image bytes (volatile writer
metadata such as timestamps and tool versions is stripped).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "diffcg-plots"

import matplotlib.pyplot as plt

__all__ = ["CsvError", "PlotSpec", "read_curves", "render_curves"]


class CsvError(ValueError):
    """Input does not conform to the learning-curve CSV schema."""


_SUFFIXES = (".png", ".svg")


@dataclass(frozen=True)
class PlotSpec:
    """One figure: where to read, where to write, and the axis options."""

    input_path: str
    output_path: str
    title: str | None = None
    ylim: tuple[float, float] | None = None

    def __post_init__(self):
        suffix = Path(self.output_path).suffix.lower()
        if suffix not in _SUFFIXES:
            raise ValueError(
                f"output must end in {' or '.join(_SUFFIXES)}, got {suffix or 'no suffix'!r}"
            )
        if self.ylim is not None:
            lo, hi = self.ylim
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise ValueError(f"ylim must be finite with lo < hi, got {self.ylim}")


def read_curves(path):
    """Parse a learning-curve CSV into (iterations, labels, columns).

    columns is a list of float lists, one per label. Malformed content
    raises CsvError naming the offending line and column.
    """
    try:
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise CsvError(f"cannot read {path}: {exc}") from exc

    if not rows:
        raise CsvError(f"{path} is empty")
    header = rows[0]
    if len(header) < 2 or header[0] != "iter":
        raise CsvError(
            f"line 1: header must be 'iter,<label1>,...', got {','.join(header)!r}"
        )
    labels = header[1:]
    if any(not label for label in labels):
        raise CsvError("line 1: empty column label")

    iterations: list[int] = []
    columns: list[list[float]] = [[] for _ in labels]
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CsvError(
                f"line {line_no}: expected {len(header)} cells, found {len(row)}"
            )
        try:
            iterations.append(int(row[0]))
        except ValueError as exc:
            raise CsvError(
                f"line {line_no}, column 'iter': could not parse {row[0]!r}"
            ) from exc
        for label, cell, column in zip(labels, row[1:], columns):
            try:
                value = float(cell)
            except ValueError as exc:
                raise CsvError(
                    f"line {line_no}, column {label!r}: could not parse {cell!r}"
                ) from exc
            if not math.isfinite(value):
                raise CsvError(
                    f"line {line_no}, column {label!r}: {cell!r} is not finite"
                )
            column.append(value)

    if not iterations:
        raise CsvError(f"{path} has a header but no data rows")
    return iterations, labels, columns


def render_curves(spec: PlotSpec) -> list[str]:
    """Render one line per algorithm column; returns the legend labels."""
    iterations, labels, columns = read_curves(spec.input_path)

    fig, ax = plt.subplots(figsize=(8.0, 5.0), dpi=120)
    try:
        for label, column in zip(labels, columns):
            ax.plot(iterations, column, label=label, linewidth=1.4)
        ax.set_xlabel("iteration")
        ax.set_ylabel("MSD (dB)")
        ax.grid(alpha=0.3)
        ax.legend(loc="upper right", fontsize=9)
        if spec.title:
            ax.set_title(spec.title)
        if spec.ylim is not None:
            ax.set_ylim(*spec.ylim)
        fig.tight_layout()
        if Path(spec.output_path).suffix.lower() == ".png":
            metadata = {"Software": None}
        else:
            metadata = {"Date": None}
        fig.savefig(spec.output_path, metadata=metadata)
    finally:
        plt.close(fig)
    return labels
