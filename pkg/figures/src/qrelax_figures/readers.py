"""Readers for the run/sweep artifact schemas."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def read_trajectory(path) -> dict[str, np.ndarray]:
    """Load a trajectory CSV into named columns, deriving |rho_ij| magnitudes."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    cols = {name: data[:, k] for k, name in enumerate(header)}
    for name in header:
        if name.startswith("rho_re_"):
            suffix = name[len("rho_re_"):]
            im = cols.get(f"rho_im_{suffix}")
            if im is not None:
                cols[f"abs_rho_{suffix}"] = np.hypot(cols[name], im)
    return cols


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def read_sweep(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_dirs(root) -> list[Path]:
    """Run subdirectories (holding trajectory.csv), sorted by name."""
    root = Path(root)
    return sorted(p for p in root.iterdir()
                  if p.is_dir() and (p / "trajectory.csv").is_file())
