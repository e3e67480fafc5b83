"""Static figures from simulation artifacts (trajectory.csv, summary.json, sweep.csv)."""

from .figures import FigureError, PlotSpec, plot_fit, plot_timeseries

__version__ = "0.1.0"

__all__ = ["FigureError", "PlotSpec", "plot_fit", "plot_timeseries"]
