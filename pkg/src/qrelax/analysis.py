"""Equilibrium predictions and statistical post-processing.

The a-priori equilibrium distribution of the gas follows from state counting
over the degeneracies at fixed total energy U:

    p(E_gas) = n_container(U - E_gas) * n_gas(E_gas) / sum over all gas energies

For initial states spreading over several shells, the same counting is applied
shell by shell and mixed with the conserved shell probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, PredictionError, WindowError
from .model import SpectrumSpec
from .observables import ShellDistribution
from .propagator import Trajectory


@dataclass(frozen=True)
class EquilibriumPrediction:
    """Predicted occupation probability per gas level energy."""

    gas_energies: np.ndarray
    probabilities: np.ndarray
    weights: np.ndarray
    mean_energy: float

    def probability_at(self, energy: float, tol: float = 1e-9) -> float:
        hits = np.abs(self.gas_energies - energy) <= tol
        return float(self.probabilities[hits].sum())


@dataclass(frozen=True)
class MixturePrediction:
    """Shell-weighted equilibrium prediction for gas and container levels."""

    gas: EquilibriumPrediction
    container_energies: np.ndarray
    container_probabilities: np.ndarray
    per_shell: tuple[EquilibriumPrediction, ...]
    shell_weights: np.ndarray


def predict_equilibrium(spec: SpectrumSpec, u: float) -> EquilibriumPrediction:
    """State-counting equilibrium distribution at total energy u."""
    energies = np.array([e for e, _ in spec.gas_levels])
    weights = np.array([
        spec.container_degeneracy_at(u - e) * d for e, d in spec.gas_levels
    ], dtype=float)
    total = weights.sum()
    if total <= 0:
        raise PredictionError(
            f"no container levels reachable from total energy U={u}; "
            "all statistical weights are zero")
    return EquilibriumPrediction(gas_energies=energies, probabilities=weights / total,
                                 weights=weights, mean_energy=float(u))


def predict_equilibrium_mixture(
        spec: SpectrumSpec, ptot: ShellDistribution) -> MixturePrediction:
    """Apply the equilibrium counting within each shell and mix by shell weight.

    Also emits the implied container level occupations: within a shell of
    energy U every container level m contributes weight n^c_m * n^g(U - E^c_m).
    """
    probs = np.asarray(ptot.probabilities, dtype=float)
    if abs(probs.sum() - 1.0) > 1e-10:
        raise PredictionError("shell distribution is not normalized")
    gas_energies = np.array([e for e, _ in spec.gas_levels])
    cont_energies = spec.container_level_energies
    cont_degs = spec.container_degeneracies.astype(float)

    gas_mix = np.zeros(len(gas_energies))
    cont_mix = np.zeros(len(cont_energies))
    per_shell = []
    for u, w in zip(ptot.energies, probs):
        if w <= 0:
            continue
        pred = predict_equilibrium(spec, float(u))
        per_shell.append(pred)
        gas_mix += w * pred.probabilities
        cont_weights = cont_degs * np.array(
            [spec.gas_degeneracy_at(u - ec) for ec in cont_energies], dtype=float)
        cont_mix += w * cont_weights / cont_weights.sum()
    mean_u = float(np.dot(probs, ptot.energies))
    gas = EquilibriumPrediction(gas_energies=gas_energies, probabilities=gas_mix,
                                weights=gas_mix.copy(), mean_energy=mean_u)
    return MixturePrediction(gas=gas, container_energies=cont_energies.copy(),
                             container_probabilities=cont_mix,
                             per_shell=tuple(per_shell),
                             shell_weights=probs.copy())


@dataclass(frozen=True)
class WindowStats:
    """Mean and population variance of one observable over the tail window."""

    observable: str
    t_min: float
    mean: float
    variance: float
    count: int


MIN_WINDOW_SAMPLES = 10


def window_stats(traj: Trajectory, observable: str, t_min: float) -> WindowStats:
    """Equilibrium-window statistics of a trajectory column (t >= t_min)."""
    if observable not in traj.columns:
        raise KeyError(f"trajectory has no column {observable!r}")
    values = traj.columns[observable][traj.times >= t_min]
    if len(values) == 0:
        raise WindowError(f"window t >= {t_min} selects no samples")
    if len(values) < MIN_WINDOW_SAMPLES:
        raise WindowError(
            f"window t >= {t_min} selects only {len(values)} samples "
            f"(need >= {MIN_WINDOW_SAMPLES})")
    return WindowStats(observable=observable, t_min=float(t_min),
                       mean=float(values.mean()), variance=float(values.var()),
                       count=int(len(values)))


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit parameters and residual norm."""

    model: str
    params: dict[str, float] = field(default_factory=dict)
    residual: float = 0.0


def fit_exponential(points) -> FitResult:
    """Fit p = A exp(-beta E) by unweighted linear least squares on ln p."""
    pts = [(float(e), float(p)) for e, p in points]
    if len(pts) < 2:
        raise FitError("exponential fit needs at least 2 points")
    if any(p <= 0 for _, p in pts):
        raise FitError("exponential fit needs strictly positive probabilities")
    e = np.array([x for x, _ in pts])
    logp = np.log([p for _, p in pts])
    design = np.column_stack([np.ones_like(e), -e])
    coeff, *_ = np.linalg.lstsq(design, logp, rcond=None)
    log_a, beta = coeff
    residual = float(np.linalg.norm(design @ coeff - logp))
    return FitResult(model="exponential",
                     params={"amplitude": float(np.exp(log_a)), "beta": float(beta)},
                     residual=residual)


def fit_inverse_size(points) -> FitResult:
    """Fit variance = c / n with the exponent fixed at -1.

    Also reports a free-exponent log-log fit (params free_c, free_exponent)
    as a scaling diagnostic when all variances are positive.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise FitError("inverse-size fit needs at least 3 points")
    n = np.array([x for x, _ in pts])
    v = np.array([y for _, y in pts])
    if np.any(n <= 0):
        raise FitError("sizes must be positive")
    if np.all(n == n[0]):
        raise FitError("sizes are all identical; scaling fit is degenerate")
    x = 1.0 / n
    c = float(np.dot(v, x) / np.dot(x, x))
    residual = float(np.linalg.norm(v - c * x))
    params = {"c": c, "exponent": -1.0}
    if np.all(v > 0):
        design = np.column_stack([np.ones_like(n), np.log(n)])
        coeff, *_ = np.linalg.lstsq(design, np.log(v), rcond=None)
        params["free_c"] = float(np.exp(coeff[0]))
        params["free_exponent"] = float(coeff[1])
    return FitResult(model="inverse-size", params=params, residual=residual)
