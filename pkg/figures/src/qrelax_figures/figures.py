"""Figure builders: time series, overlays, and data-plus-fit plots.

Rendering is deterministic: fixed figure geometry, Agg backend, sorted inputs,
and a pinned PNG metadata block, so repeated invocations on the same artifacts
are byte-identical.  Fit curves are drawn from parameters already present in
summary/sweep artifacts; nothing is refitted here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import read_summary, read_sweep, read_trajectory

FIGSIZE = (6.4, 4.4)
DPI = 120
PNG_METADATA = {"Software": "make-figures"}


class FigureError(Exception):
    pass


@dataclass(frozen=True)
class PlotSpec:
    """Resolved description of one figure to render."""

    kind: str  # timeseries | overlay | scatter_fit | bar_fit
    inputs: tuple[Path, ...]
    output: Path
    columns: tuple[str, ...] = ()
    labels: tuple[str, ...] = ()
    axis_labels: tuple[str, str] = ("time", "value")
    extras: dict = field(default_factory=dict)


def _save(fig, out_path: Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=DPI, metadata=PNG_METADATA)
    plt.close(fig)
    return out_path


def plot_timeseries(inputs, columns, out_path, labels=None,
                    ylabel="value", reference=None) -> Path:
    """One curve per (input csv, column) pair over the time axis.

    `reference`, when given, is drawn as a horizontal dashed guide line.
    """
    inputs = [Path(p) for p in (inputs if isinstance(inputs, (list, tuple)) else [inputs])]
    columns = list(columns) if not isinstance(columns, str) else [columns]
    if not columns:
        raise FigureError("no columns selected for the time-series plot")
    if labels is None:
        labels = [None] * (len(inputs) * len(columns))

    fig, ax = plt.subplots(figsize=FIGSIZE)
    k = 0
    for path in inputs:
        cols = read_trajectory(path)
        for name in columns:
            if name not in cols:
                raise FigureError(
                    f"{path}: column {name!r} not found "
                    f"(available: {', '.join(sorted(cols))})")
            default = name if len(inputs) == 1 else f"{path.parent.name}:{name}"
            ax.plot(cols["t"], cols[name], lw=1.0, label=labels[k] or default)
            k += 1
    if reference is not None:
        ax.axhline(reference, color="0.4", ls="--", lw=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.25)
    return _save(fig, out_path)


def plot_fit(inputs, out_path, kind="exponential") -> Path:
    """Data points plus the fitted curve taken from summary/sweep artifacts.

    exponential: per-summary gas level means with A exp(-beta E) curves
    (semilog y).  inverse-size: sweep variances against size with the c/n
    curve.  A single data point is rendered without a curve, with a warning.
    """
    inputs = [Path(p) for p in (inputs if isinstance(inputs, (list, tuple)) else [inputs])]
    if kind == "exponential":
        return _plot_exponential_fit(inputs, out_path)
    if kind == "inverse-size":
        return _plot_inverse_size_fit(inputs, out_path)
    raise FigureError(f"unknown fit plot kind {kind!r}")


def _plot_exponential_fit(summary_paths, out_path) -> Path:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    markers = ["o", "s", "^", "d"]
    for k, path in enumerate(sorted(summary_paths)):
        doc = read_summary(path)
        points = doc.get("gas_level_window_means")
        if not points:
            raise FigureError(f"{path}: no gas level means to plot")
        label = doc.get("config_id", Path(path).parent.name)
        energies = np.array([e for e, _ in points])
        probs = np.array([p for _, p in points])
        ax.semilogy(energies, probs, markers[k % len(markers)], ms=5,
                    ls="none", label=label)
        fit = (doc.get("fits") or {}).get("exponential")
        if fit is None:
            if len(points) == 1:
                warnings.warn(f"{path}: single data point, skipping fit curve")
                continue
            raise FigureError(f"{path}: summary carries no exponential fit block")
        grid = np.linspace(energies.min(), energies.max(), 200)
        ax.semilogy(grid, fit["amplitude"] * np.exp(-fit["beta"] * grid), lw=1.0,
                    label=f"{label} fit: {fit['amplitude']:.2f}"
                          f" exp(-{fit['beta']:.2f} E)")
    ax.set_xlabel("gas level energy")
    ax.set_ylabel("mean occupation probability")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.25, which="both")
    return _save(fig, out_path)


def _plot_inverse_size_fit(inputs, out_path) -> Path:
    sweep_dir = inputs[0]
    rows = [r for r in read_sweep(sweep_dir / "sweep.csv") if r["status"] == "ok"]
    if not rows:
        raise FigureError(f"{sweep_dir}: sweep.csv has no successful rows")
    fit_path = sweep_dir / "sweep_summary.json"
    if not fit_path.is_file():
        raise FigureError(f"{sweep_dir}: sweep_summary.json with the fit block "
                          "is missing")
    fit = read_summary(fit_path)["fit"]
    sizes = np.array([float(r["n_c_1"]) for r in rows])
    variances = np.array([float(r["var_rho_0_0"]) for r in rows])

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.loglog(sizes, variances, "o", ms=5, label="simulations")
    if len(rows) == 1:
        warnings.warn(f"{sweep_dir}: single data point, skipping fit curve")
    else:
        c = fit["params"]["c"]
        grid = np.linspace(sizes.min(), sizes.max(), 200)
        ax.loglog(grid, c / grid, lw=1.0, label=f"least square fit {c:.3f}/n")
    ax.set_xlabel("degeneracy of the middle container level")
    ax.set_ylabel("variance of ground-state probability")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.25, which="both")
    return _save(fig, out_path)
