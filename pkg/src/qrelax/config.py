"""Experiment configuration: TOML schema, validation, and sweep expansion.

A config is a single TOML document with `schema = 1` and sections `spectrum`,
`initial`, `time`, `run`, and optionally `sweep`.  Sweep axes (container size,
coupling strength, initial gas probability) expand to a cross product of fully
resolved single-run variants with deterministic, sortable ids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .model import CouplingMode, InitialState, SpectrumSpec

SCHEMA_VERSION = 1

_ALLOWED = {
    "": {"schema", "name", "spectrum", "initial", "time", "run", "sweep"},
    "spectrum": {"gas_levels", "container_levels", "delta_e", "coupling_mode", "alpha"},
    "initial": {"p0", "phase", "gas_level", "gas_amplitudes",
                "container_level", "container_slot", "container_amplitudes"},
    "time": {"t_max", "dt"},
    "run": {"seed", "seeds", "window_start", "out_dir", "dump_matrices",
            "restrict_to_active"},
    "sweep": {"sizes", "alphas", "p0_values"},
}


def _reject_unknown(section: str, table: dict) -> None:
    allowed = _ALLOWED[section]
    for key in table:
        if key not in allowed:
            where = f"{section}.{key}" if section else key
            raise ConfigError(f"{where}: unknown key (allowed: {sorted(allowed)})")


def _require(table: dict, section: str, key: str):
    if key not in table:
        raise ConfigError(f"{section}.{key}: required field is missing")
    return table[key]


def _levels(raw, where: str) -> tuple[tuple[float, int], ...]:
    out = []
    for k, entry in enumerate(raw):
        if isinstance(entry, (int, float)):
            out.append((float(entry), 1))
        elif isinstance(entry, list) and len(entry) == 2:
            energy, deg = entry
            if not isinstance(deg, int) or deg < 1:
                raise ConfigError(f"{where}[{k}]: degeneracy must be a positive integer")
            out.append((float(energy), deg))
        else:
            raise ConfigError(
                f"{where}[{k}]: expected an energy or an [energy, degeneracy] pair")
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description (one spectrum, one initial state)."""

    name: str
    gas_levels: tuple[tuple[float, int], ...]
    container_levels: tuple[tuple[float, int], ...]
    coupling_mode: str
    alpha: float
    delta_e: float
    p0: float | None
    phase: float
    gas_level: int | None
    gas_amplitudes: tuple[complex, ...] | None
    container_level: int
    container_slot: int
    t_max: float
    dt: float
    seeds: tuple[int, ...]
    window_start: float
    out_dir: str | None = None
    dump_matrices: bool = False
    restrict_to_active: bool = False
    sweep_sizes: tuple[int, ...] | None = None
    sweep_alphas: tuple[float, ...] | None = None
    sweep_p0_values: tuple[float, ...] | None = None

    @property
    def is_sweep(self) -> bool:
        return any(axis is not None for axis in
                   (self.sweep_sizes, self.sweep_alphas, self.sweep_p0_values))

    def spectrum_spec(self) -> SpectrumSpec:
        return SpectrumSpec(gas_levels=self.gas_levels,
                            container_levels=self.container_levels,
                            alpha=self.alpha, delta_e=self.delta_e,
                            coupling_mode=CouplingMode(self.coupling_mode))

    def initial_state(self) -> InitialState:
        n_gas = sum(d for _, d in self.gas_levels)
        if self.gas_amplitudes is not None:
            amps = np.asarray(self.gas_amplitudes, dtype=complex)
        elif self.gas_level is not None:
            amps = np.zeros(n_gas, dtype=complex)
            amps[self.gas_level] = 1.0
        else:
            amps = np.array([np.sqrt(self.p0),
                             np.exp(1j * self.phase) * np.sqrt(1.0 - self.p0)])
        return InitialState(gas_amplitudes=amps,
                            container_level=self.container_level,
                            container_slot=self.container_slot)

    def config_id(self, size: int | None = None, alpha: float | None = None,
                  p0: float | None = None) -> str:
        parts = [self.name]
        if size is not None:
            parts.append(f"n{size:04d}")
        if alpha is not None:
            parts.append(f"a{alpha:g}")
        if p0 is not None:
            parts.append(f"p{p0:g}")
        return "-".join(parts)

    def _with_size(self, size: int) -> "ExperimentConfig":
        if len(self.container_levels) < 2:
            raise ConfigError("sweep.sizes needs at least 2 container levels")
        base = self.container_levels[1][1]
        scaled = tuple((e, max(1, round(d * size / base)))
                       for e, d in self.container_levels)
        return replace(self, container_levels=scaled)

    def expand(self) -> list[tuple[str, "ExperimentConfig"]]:
        """Cross product of sweep axes as (config_id, resolved variant) pairs."""
        sizes = self.sweep_sizes if self.sweep_sizes is not None else [None]
        alphas = self.sweep_alphas if self.sweep_alphas is not None else [None]
        p0s = self.sweep_p0_values if self.sweep_p0_values is not None else [None]
        variants = []
        for size, alpha, p0 in itertools.product(sizes, alphas, p0s):
            cfg = replace(self, sweep_sizes=None, sweep_alphas=None,
                          sweep_p0_values=None)
            if size is not None:
                cfg = cfg._with_size(size)
            if alpha is not None:
                cfg = replace(cfg, alpha=alpha)
            if p0 is not None:
                cfg = replace(cfg, p0=p0, gas_level=None, gas_amplitudes=None)
            variants.append((self.config_id(size, alpha, p0), cfg))
        variants.sort(key=lambda pair: pair[0])
        return variants

    def echo(self) -> dict:
        """JSON-serializable dump of the resolved configuration."""
        out = {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "spectrum": {
                "gas_levels": [[e, d] for e, d in self.gas_levels],
                "container_levels": [[e, d] for e, d in self.container_levels],
                "coupling_mode": self.coupling_mode,
                "alpha": self.alpha,
                "delta_e": self.delta_e,
            },
            "initial": {
                "container_level": self.container_level,
                "container_slot": self.container_slot,
            },
            "time": {"t_max": self.t_max, "dt": self.dt},
            "run": {
                "seeds": list(self.seeds),
                "window_start": self.window_start,
                "dump_matrices": self.dump_matrices,
                "restrict_to_active": self.restrict_to_active,
            },
        }
        if self.p0 is not None:
            out["initial"]["p0"] = self.p0
            out["initial"]["phase"] = self.phase
        if self.gas_level is not None:
            out["initial"]["gas_level"] = self.gas_level
        if self.gas_amplitudes is not None:
            out["initial"]["gas_amplitudes"] = [
                [a.real, a.imag] for a in self.gas_amplitudes]
        if self.out_dir is not None:
            out["run"]["out_dir"] = self.out_dir
        return out


def parse_config(text: str, name: str = "experiment") -> ExperimentConfig:
    """Parse and validate a TOML config document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    _reject_unknown("", doc)
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"schema: expected {SCHEMA_VERSION}, got {doc.get('schema')!r}")

    spectrum = doc.get("spectrum")
    if not isinstance(spectrum, dict):
        raise ConfigError("spectrum: required section is missing")
    _reject_unknown("spectrum", spectrum)
    gas_levels = _levels(_require(spectrum, "spectrum", "gas_levels"),
                         "spectrum.gas_levels")
    container_levels = _levels(_require(spectrum, "spectrum", "container_levels"),
                               "spectrum.container_levels")
    mode = _require(spectrum, "spectrum", "coupling_mode")
    if mode not in (m.value for m in CouplingMode):
        raise ConfigError(f"spectrum.coupling_mode: must be one of "
                          f"{[m.value for m in CouplingMode]}, got {mode!r}")
    alpha = float(_require(spectrum, "spectrum", "alpha"))
    if alpha <= 0:
        raise ConfigError("spectrum.alpha: must be > 0")
    delta_e = float(spectrum.get("delta_e", 1.0))
    if delta_e <= 0:
        raise ConfigError("spectrum.delta_e: must be > 0")

    initial = doc.get("initial")
    if not isinstance(initial, dict):
        raise ConfigError("initial: required section is missing")
    _reject_unknown("initial", initial)
    forms = [k for k in ("p0", "gas_level", "gas_amplitudes") if k in initial]
    if len(forms) != 1:
        raise ConfigError(
            "initial: exactly one of p0, gas_level, gas_amplitudes is required")
    n_gas = sum(d for _, d in gas_levels)
    p0 = gas_level = gas_amps = None
    if "p0" in initial:
        p0 = float(initial["p0"])
        if not 0.0 <= p0 <= 1.0:
            raise ConfigError("initial.p0: must lie in [0, 1]")
        if n_gas != 2:
            raise ConfigError("initial.p0: only defined for a 2-state gas")
    elif "gas_level" in initial:
        gas_level = int(initial["gas_level"])
        if not 0 <= gas_level < n_gas:
            raise ConfigError(f"initial.gas_level: must lie in [0, {n_gas - 1}]")
    else:
        raw = initial["gas_amplitudes"]
        amps = []
        for k, entry in enumerate(raw):
            if isinstance(entry, (int, float)):
                amps.append(complex(entry))
            elif isinstance(entry, list) and len(entry) == 2:
                amps.append(complex(float(entry[0]), float(entry[1])))
            else:
                raise ConfigError(f"initial.gas_amplitudes[{k}]: expected a real "
                                  "number or an [re, im] pair")
        if len(amps) != n_gas:
            raise ConfigError(f"initial.gas_amplitudes: expected {n_gas} entries")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ConfigError("initial.gas_amplitudes: must be unit-norm")
        gas_amps = tuple(amps)
    phase = float(initial.get("phase", 0.0))
    container_level = int(_require(initial, "initial", "container_level"))
    if not 0 <= container_level < len(container_levels):
        raise ConfigError(f"initial.container_level: must lie in "
                          f"[0, {len(container_levels) - 1}]")
    container_slot = int(initial.get("container_slot", 1))
    if not 1 <= container_slot <= container_levels[container_level][1]:
        raise ConfigError(
            f"initial.container_slot: must lie in "
            f"[1, {container_levels[container_level][1]}] for level {container_level}")

    time_tbl = doc.get("time", {})
    if not isinstance(time_tbl, dict):
        raise ConfigError("time: expected a table")
    _reject_unknown("time", time_tbl)
    t_max = float(time_tbl.get("t_max", 20.0))
    dt = float(time_tbl.get("dt", 0.02))
    if dt <= 0:
        raise ConfigError("time.dt: must be > 0")
    if t_max < dt:
        raise ConfigError("time.t_max: must be >= dt")

    run_tbl = doc.get("run", {})
    if not isinstance(run_tbl, dict):
        raise ConfigError("run: expected a table")
    _reject_unknown("run", run_tbl)
    if "seed" in run_tbl and "seeds" in run_tbl:
        raise ConfigError("run: give either seed or seeds, not both")
    if "seeds" in run_tbl:
        seeds = tuple(int(s) for s in run_tbl["seeds"])
    elif "seed" in run_tbl:
        seeds = (int(run_tbl["seed"]),)
    else:
        seeds = (1,)
    if not seeds:
        raise ConfigError("run.seeds: must not be empty")
    window_start = float(run_tbl.get("window_start", 10.0))
    if not 0 <= window_start < t_max:
        raise ConfigError("run.window_start: must lie in [0, t_max)")

    sweep_tbl = doc.get("sweep", {})
    if not isinstance(sweep_tbl, dict):
        raise ConfigError("sweep: expected a table")
    _reject_unknown("sweep", sweep_tbl)
    sizes = alphas = p0s = None
    if "sizes" in sweep_tbl:
        sizes = tuple(int(s) for s in sweep_tbl["sizes"])
        if not sizes or any(s < 1 for s in sizes):
            raise ConfigError("sweep.sizes: must be non-empty positive integers")
    if "alphas" in sweep_tbl:
        alphas = tuple(float(a) for a in sweep_tbl["alphas"])
        if not alphas or any(a <= 0 for a in alphas):
            raise ConfigError("sweep.alphas: must be non-empty and positive")
    if "p0_values" in sweep_tbl:
        p0s = tuple(float(p) for p in sweep_tbl["p0_values"])
        if not p0s or any(not 0 <= p <= 1 for p in p0s):
            raise ConfigError("sweep.p0_values: must be non-empty and within [0, 1]")
        if n_gas != 2:
            raise ConfigError("sweep.p0_values: only defined for a 2-state gas")

    cfg = ExperimentConfig(
        name=str(doc.get("name", name)),
        gas_levels=gas_levels,
        container_levels=container_levels,
        coupling_mode=mode,
        alpha=alpha,
        delta_e=delta_e,
        p0=p0,
        phase=phase,
        gas_level=gas_level,
        gas_amplitudes=gas_amps,
        container_level=container_level,
        container_slot=container_slot,
        t_max=t_max,
        dt=dt,
        seeds=seeds,
        window_start=window_start,
        out_dir=run_tbl.get("out_dir"),
        dump_matrices=bool(run_tbl.get("dump_matrices", False)),
        restrict_to_active=bool(run_tbl.get("restrict_to_active", False)),
        sweep_sizes=sizes,
        sweep_alphas=alphas,
        sweep_p0_values=p0s,
    )
    # cross-validate spectrum invariants early for a config-level diagnostic
    try:
        cfg.spectrum_spec()
    except ValueError as exc:
        raise ConfigError(f"spectrum: {exc}") from exc
    return cfg


def parse_config_file(path) -> ExperimentConfig:
    from pathlib import Path

    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, name=p.stem)
