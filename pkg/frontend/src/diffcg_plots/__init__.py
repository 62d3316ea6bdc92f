"""Learning-curve figure rendering for diffcg CSV output."""

from .render import CsvError, PlotSpec, read_curves, render_curves

__version__ = "0.1.0"

__all__ = ["CsvError", "PlotSpec", "read_curves", "render_curves"]
