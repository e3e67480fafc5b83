"""Experiment execution: single runs, sweeps, and their on-disk artifacts.

A run composes the pipeline model -> ensemble -> propagator -> observables ->
analysis and writes `trajectory.csv` plus `summary.json` into its run
directory.  Sweeps execute the expanded variant x seed grid (optionally in a
process pool) and write `sweep.csv` plus, when sizes vary, `sweep_summary.json`
with the variance-scaling fits.  All file writes are atomic
(write-temp-then-rename) and identical (config, seed) pairs produce
byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, ensemble, model, observables, propagator
from .config import ExperimentConfig
from .errors import FitError, QrelaxError

log = logging.getLogger("qrelax")

TIME_CHUNK = 512


@dataclass(frozen=True)
class RunArtifacts:
    """Paths and headline results of a completed run."""

    run_dir: Path
    trajectory_path: Path
    summary_path: Path
    summary: dict
    dump_paths: tuple[Path, ...] = ()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def _trajectory_csv(traj: propagator.Trajectory, schema: list[str]) -> bytes:
    lines = ["t," + ",".join(schema)]
    cols = [traj.columns[name] for name in schema]
    for k, t in enumerate(traj.times):
        lines.append(repr(float(t)) + "," + _format_row(col[k] for col in cols))
    return ("\n".join(lines) + "\n").encode()


def _active_indices(mask: model.CouplingMask, psi0: np.ndarray) -> np.ndarray:
    """Indices of all coupling blocks that carry initial amplitude.

    The Hamiltonian is block diagonal in the mask blocks, so amplitudes outside
    the initially populated blocks stay exactly zero; restricting to them is an
    exact reduction, not an approximation.
    """
    populated = np.unique(mask.block_id[np.abs(psi0) > 0])
    return np.nonzero(np.isin(mask.block_id, populated))[0]


def simulate(cfg: ExperimentConfig, seed: int) -> propagator.Trajectory:
    """Run the pipeline for one (config, seed) pair and collect observables."""
    spec = cfg.spectrum_spec()
    basis = model.build_basis(spec)
    h0 = model.build_h0(spec, basis)
    shells = model.build_shell_map(spec, basis)
    mask = model.coupling_mask(spec, basis)
    psi0 = model.build_initial_state(cfg.initial_state(), basis)

    hint = ensemble.sample_interaction(spec, mask, seed)
    h = ensemble.assemble_hamiltonian(h0, hint)

    n_total = spec.n_total
    if cfg.restrict_to_active:
        active = _active_indices(mask, psi0)
    else:
        active = np.arange(n_total)
    restricted = len(active) < n_total
    h_run = h[np.ix_(active, active)] if restricted else h
    psi_run = psi0[active] if restricted else psi0

    t0 = time.perf_counter()
    eig = propagator.eigh(h_run)
    t_eigh = time.perf_counter() - t0

    n_steps = int(round(cfg.t_max / cfg.dt))
    grid = np.arange(n_steps + 1) * cfg.dt

    n_gas, n_shell = basis.n_gas, shells.n_shells
    n_clevels = len(cfg.container_levels)
    pairs = [(i, j) for i in range(n_gas) for j in range(i, n_gas)]
    cols: dict[str, np.ndarray] = {"norm": np.empty(len(grid))}
    for i, j in pairs:
        cols[f"rho_re_{i}_{j}"] = np.empty(len(grid))
        cols[f"rho_im_{i}_{j}"] = np.empty(len(grid))
    cols["S"] = np.empty(len(grid))
    for m in range(n_clevels):
        cols[f"p_c_{m}"] = np.empty(len(grid))
    for k in range(n_shell):
        cols[f"p_shell_{k}"] = np.empty(len(grid))

    buffer = np.zeros((n_total, TIME_CHUNK), dtype=complex) if restricted else None
    for start in range(0, len(grid), TIME_CHUNK):
        stop = min(start + TIME_CHUNK, len(grid))
        psis = propagator.evolve_series(eig, psi_run, grid[start:stop]).T
        if restricted:
            full = buffer[:, : stop - start]
            full[active] = psis
        else:
            full = psis
        sl = slice(start, stop)
        cols["norm"][sl] = np.linalg.norm(full, axis=0)
        rhos = observables.reduce_gas_batch(full, basis)
        for i, j in pairs:
            cols[f"rho_re_{i}_{j}"][sl] = rhos[:, i, j].real
            cols[f"rho_im_{i}_{j}"][sl] = rhos[:, i, j].imag
        cols["S"][sl] = observables.entropy_batch(rhos)
        pc = observables.reduce_container_levels_batch(full, basis)
        for m in range(n_clevels):
            cols[f"p_c_{m}"][sl] = pc[m]
        ps = observables.shell_probabilities_batch(full, shells)
        for k in range(n_shell):
            cols[f"p_shell_{k}"][sl] = ps[k]
    for i, j in pairs:
        if i != j:
            cols[f"abs_rho_{i}_{j}"] = np.hypot(
                cols[f"rho_re_{i}_{j}"], cols[f"rho_im_{i}_{j}"])

    max_drift = float(np.abs(cols["norm"] - 1.0).max())
    metadata = {
        "seed": seed,
        "alpha": cfg.alpha,
        "spectrum_hash": spec.stable_hash(),
        "n_total": n_total,
        "n_active": int(len(active)),
        "eigh_residual": eig.residual,
        "eigh_orthonormality": eig.orthonormality,
        "max_norm_drift": max_drift,
        "eigh_seconds": t_eigh,
        "csv_schema": [name for name in cols if not name.startswith("abs_rho_")],
    }
    if max_drift > 1e-9:
        raise QrelaxError(f"unitarity violated: max norm drift {max_drift:.3e}")
    return propagator.Trajectory(times=grid, columns=cols, metadata=metadata)


def _window_block(cfg: ExperimentConfig, traj: propagator.Trajectory) -> dict:
    stats = {}
    for name in traj.columns:
        ws = analysis.window_stats(traj, name, cfg.window_start)
        stats[name] = {"mean": ws.mean, "variance": ws.variance}
    first = analysis.window_stats(traj, "norm", cfg.window_start)
    return {"t_min": cfg.window_start, "count": first.count, "stats": stats}


def _prediction_block(cfg: ExperimentConfig) -> dict:
    spec = cfg.spectrum_spec()
    basis = model.build_basis(spec)
    shells = model.build_shell_map(spec, basis)
    psi0 = model.build_initial_state(cfg.initial_state(), basis)
    ptot = observables.shell_distribution(psi0, shells)
    mix = analysis.predict_equilibrium_mixture(spec, ptot)
    return {
        "mean_energy": ptot.mean_energy,
        "shell_energies": [float(e) for e in ptot.energies],
        "shell_probabilities": [float(p) for p in ptot.probabilities],
        "gas": {
            "energies": [float(e) for e in mix.gas.gas_energies],
            "probabilities": [float(p) for p in mix.gas.probabilities],
        },
        "container": {
            "energies": [float(e) for e in mix.container_energies],
            "probabilities": [float(p) for p in mix.container_probabilities],
        },
    }


def _gas_level_window_means(cfg: ExperimentConfig, window: dict) -> list[tuple[float, float]]:
    """Window-mean occupation per gas level (degenerate states summed)."""
    spec = cfg.spectrum_spec()
    level_of_state = spec.gas_state_level
    means = []
    for lvl, (energy, _deg) in enumerate(cfg.gas_levels):
        states = np.nonzero(level_of_state == lvl)[0]
        total = sum(window["stats"][f"rho_re_{i}_{i}"]["mean"] for i in states)
        means.append((energy, total))
    return means


def run_experiment(cfg: ExperimentConfig, seed: int | None = None,
                   out_dir: str | os.PathLike | None = None,
                   config_id: str | None = None) -> RunArtifacts:
    """Execute one run and write its artifacts; cleans up on failure."""
    if cfg.is_sweep:
        raise QrelaxError("config defines a sweep; use run_sweep")
    seed = cfg.seeds[0] if seed is None else seed
    config_id = config_id or cfg.name
    run_dir = Path(out_dir) if out_dir is not None else \
        Path(cfg.out_dir or f"runs/{cfg.name}")

    started = time.perf_counter()
    traj = simulate(cfg, seed)
    window = _window_block(cfg, traj)
    predictions = _prediction_block(cfg)

    fits = {"exponential": None}
    level_means = _gas_level_window_means(cfg, window)
    if len(cfg.gas_levels) >= 3:
        try:
            fit = analysis.fit_exponential(level_means)
            fits["exponential"] = {"amplitude": fit.params["amplitude"],
                                   "beta": fit.params["beta"],
                                   "residual": fit.residual}
        except FitError as exc:
            fits["exponential_error"] = str(exc)

    echo = cfg.echo()
    echo["run"]["seeds"] = [seed]
    summary = {
        "schema": 1,
        "config_id": config_id,
        "seed": seed,
        "config": echo,
        "spectrum_hash": traj.metadata["spectrum_hash"],
        "n_total": traj.metadata["n_total"],
        "n_active": traj.metadata["n_active"],
        "time_grid": {"t_max": cfg.t_max, "dt": cfg.dt, "count": len(traj)},
        "window": window,
        "gas_level_window_means": [[e, p] for e, p in level_means],
        "predictions": predictions,
        "fits": fits,
        "diagnostics": {
            "eigh_residual": traj.metadata["eigh_residual"],
            "eigh_orthonormality": traj.metadata["eigh_orthonormality"],
            "max_norm_drift": traj.metadata["max_norm_drift"],
        },
    }

    written: list[Path] = []
    try:
        traj_path = run_dir / "trajectory.csv"
        _atomic_write(traj_path, _trajectory_csv(traj, traj.metadata["csv_schema"]))
        written.append(traj_path)
        summary_path = run_dir / "summary.json"
        _atomic_write(summary_path,
                      (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode())
        written.append(summary_path)
        dumps: tuple[Path, ...] = ()
        if cfg.dump_matrices:
            dumps = _dump_matrices(cfg, seed, run_dir)
            written.extend(dumps)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    log.info("run %s seed=%d n=%d active=%d elapsed=%.2fs", config_id, seed,
             traj.metadata["n_total"], traj.metadata["n_active"],
             time.perf_counter() - started)
    return RunArtifacts(run_dir=run_dir, trajectory_path=traj_path,
                        summary_path=summary_path, summary=summary,
                        dump_paths=dumps)


def _dump_matrices(cfg: ExperimentConfig, seed: int, run_dir: Path) -> tuple[Path, ...]:
    """Debug dump: interaction as row-major little-endian complex pairs."""
    spec = cfg.spectrum_spec()
    basis = model.build_basis(spec)
    mask = model.coupling_mask(spec, basis)
    hint = ensemble.sample_interaction(spec, mask, seed)
    h0 = model.build_h0(spec, basis)
    pairs = np.empty((spec.n_total, spec.n_total, 2))
    pairs[:, :, 0] = hint.matrix.real
    pairs[:, :, 1] = hint.matrix.imag
    hint_path = run_dir / "hint.bin"
    _atomic_write(hint_path, pairs.astype("<f8").tobytes(order="C"))
    h0_path = run_dir / "h0.f64"
    _atomic_write(h0_path, h0.astype("<f8").tobytes())
    return (hint_path, h0_path)


SWEEP_COLUMNS = ["config_id", "seed", "n_c_1", "alpha", "p0", "n_total",
                 "n_active", "mean_rho_0_0", "var_rho_0_0", "mean_S",
                 "status", "error"]


def _sweep_job(args) -> dict:
    config_id, cfg, seed, out_dir = args
    row = {
        "config_id": config_id,
        "seed": seed,
        "n_c_1": cfg.container_levels[1][1] if len(cfg.container_levels) > 1 else "",
        "alpha": repr(cfg.alpha),
        "p0": repr(cfg.p0) if cfg.p0 is not None else "",
        "n_total": "", "n_active": "",
        "mean_rho_0_0": "", "var_rho_0_0": "", "mean_S": "",
        "status": "ok", "error": "",
    }
    try:
        run = run_experiment(cfg, seed=seed,
                             out_dir=Path(out_dir) / f"{config_id}-s{seed}",
                             config_id=config_id)
        stats = run.summary["window"]["stats"]
        row["n_total"] = run.summary["n_total"]
        row["n_active"] = run.summary["n_active"]
        row["mean_rho_0_0"] = repr(stats["rho_re_0_0"]["mean"])
        row["var_rho_0_0"] = repr(stats["rho_re_0_0"]["variance"])
        row["mean_S"] = repr(stats["S"]["mean"])
    except Exception as exc:  # individual failures recorded, sweep continues
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


@dataclass(frozen=True)
class SweepResult:
    """Artifacts and per-row outcomes of a sweep."""

    sweep_dir: Path
    csv_path: Path
    rows: tuple[dict, ...]
    n_failed: int


def run_sweep(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None,
              jobs: int = 1) -> SweepResult:
    """Execute all sweep variants x seeds; failures are recorded per row."""
    sweep_dir = Path(out_dir) if out_dir is not None else \
        Path(cfg.out_dir or f"runs/{cfg.name}")
    tasks = [(config_id, variant, seed, str(sweep_dir))
             for config_id, variant in cfg.expand()
             for seed in cfg.seeds]
    tasks.sort(key=lambda t: (t[0], t[2]))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_job, tasks))
    else:
        rows = [_sweep_job(task) for task in tasks]
    rows.sort(key=lambda r: (r["config_id"], r["seed"]))

    import io

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    csv_path = sweep_dir / "sweep.csv"
    _atomic_write(csv_path, buf.getvalue().encode())

    ok = [r for r in rows if r["status"] == "ok"]
    sizes = {r["n_c_1"] for r in ok if r["n_c_1"] != ""}
    if len(sizes) >= 3:
        points = [(float(r["n_c_1"]), float(r["var_rho_0_0"])) for r in ok]
        try:
            fit = analysis.fit_inverse_size(points)
            fit_doc = {
                "schema": 1,
                "observable": "rho_re_0_0",
                "points": [[n, v] for n, v in points],
                "fit": {"model": fit.model, "params": fit.params,
                        "residual": fit.residual},
            }
            _atomic_write(sweep_dir / "sweep_summary.json",
                          (json.dumps(fit_doc, indent=2, sort_keys=True) + "\n").encode())
        except FitError as exc:
            log.warning("variance fit skipped: %s", exc)
    return SweepResult(sweep_dir=sweep_dir, csv_path=csv_path, rows=tuple(rows),
                       n_failed=len(rows) - len(ok))
