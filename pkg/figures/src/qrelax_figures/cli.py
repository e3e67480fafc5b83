"""make-figures: render the standard images for a run or sweep directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .figures import FigureError, plot_fit, plot_timeseries
from .readers import read_summary, read_sweep, run_dirs


def _predicted_gas_ground(summary: dict) -> float | None:
    probs = (summary.get("predictions") or {}).get("gas", {}).get("probabilities")
    return probs[0] if probs else None


def _predicted_entropy(summary: dict) -> float | None:
    probs = (summary.get("predictions") or {}).get("gas", {}).get("probabilities")
    if not probs:
        return None
    p = np.array([x for x in probs if x > 0])
    return float(-(p * np.log(p)).sum())


def _overlay_members(root: Path) -> list[Path]:
    """One run per sweep variant: the lowest seed of each config id."""
    chosen: dict[str, tuple[int, Path]] = {}
    for rd in run_dirs(root):
        summary = read_summary(rd / "summary.json")
        cid, seed = summary.get("config_id", rd.name), summary.get("seed", 0)
        if cid not in chosen or seed < chosen[cid][0]:
            chosen[cid] = (seed, rd)
    return [path for _, path in sorted(chosen.values(), key=lambda v: v[1].name)]


def make_figures(input_dir: Path, out_dir: Path) -> list[Path]:
    """Detect what the directory holds and render the matching figures."""
    name = input_dir.name
    written = []

    if (input_dir / "sweep.csv").is_file():
        rows = [r for r in read_sweep(input_dir / "sweep.csv") if r["status"] == "ok"]
        sizes = {r["n_c_1"] for r in rows if r.get("n_c_1")}
        if len(sizes) > 1:
            written.append(plot_fit([input_dir], out_dir / f"{name}_variance.png",
                                    kind="inverse-size"))
            return written
        members = _overlay_members(input_dir)
        if not members:
            raise FigureError(f"{input_dir}: sweep directory has no run subdirectories")
        trajectories = [rd / "trajectory.csv" for rd in members]
        labels = [read_summary(rd / "summary.json").get("config_id", rd.name)
                  for rd in members]
        first = read_summary(members[0] / "summary.json")
        written.append(plot_timeseries(
            trajectories, ["rho_re_0_0"], out_dir / f"{name}_occupation.png",
            labels=labels, ylabel="ground-state probability",
            reference=_predicted_gas_ground(first)))
        written.append(plot_timeseries(
            trajectories, ["S"], out_dir / f"{name}_entropy.png",
            labels=labels, ylabel="entropy [k_B]",
            reference=_predicted_entropy(first)))
        return written

    if (input_dir / "trajectory.csv").is_file():
        summary = read_summary(input_dir / "summary.json")
        if (summary.get("fits") or {}).get("exponential"):
            written.append(plot_fit([input_dir / "summary.json"],
                                    out_dir / f"{name}_boltzmann.png"))
            return written
        from .readers import read_trajectory

        available = read_trajectory(input_dir / "trajectory.csv")
        columns = [c for c in ("S", "abs_rho_0_1") if c in available] or ["S"]
        written.append(plot_timeseries(
            [input_dir / "trajectory.csv"], columns,
            out_dir / f"{name}_timeseries.png", ylabel="entropy / coherence"))
        return written

    members = run_dirs(input_dir)
    if members:
        summaries = [rd / "summary.json" for rd in members]
        if any((read_summary(p).get("fits") or {}).get("exponential")
               for p in summaries):
            written.append(plot_fit(summaries, out_dir / f"{name}_boltzmann.png"))
            return written
        trajectories = [rd / "trajectory.csv" for rd in members]
        written.append(plot_timeseries(
            trajectories, ["rho_re_0_0"], out_dir / f"{name}_occupation.png",
            ylabel="ground-state probability"))
        written.append(plot_timeseries(
            trajectories, ["S"], out_dir / f"{name}_entropy.png",
            ylabel="entropy [k_B]"))
        return written

    raise FigureError(f"{input_dir}: no sweep.csv, trajectory.csv, or run "
                      "subdirectories found")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="make-figures",
        description="Render static figures for a run or sweep directory")
    parser.add_argument("input_dir", help="run or sweep directory")
    parser.add_argument("--out", default=None,
                        help="output directory (default: <input_dir>/figures)")
    args = parser.parse_args(argv)

    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        print(f"error: {input_dir} is not a directory", file=sys.stderr)
        return 1
    out_dir = Path(args.out) if args.out else input_dir / "figures"
    try:
        for path in make_figures(input_dir, out_dir):
            print(path)
    except (FigureError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
