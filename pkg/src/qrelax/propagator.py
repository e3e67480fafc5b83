"""Exact spectral time evolution plus an independent Taylor-series oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConvergenceError, EigensolverError

HERMITICITY_RTOL = 1e-12
RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of a Hermitian matrix with its accuracy report.

    Eigenvalues ascend; eigenvector columns are orthonormal.  `residual` is
    max_k ||H v_k - E_k v_k||_2 and `orthonormality` is max |V^dag V - I|.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float
    orthonormality: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def spectral_norm(self) -> float:
        return float(np.abs(self.eigenvalues).max()) if self.n else 0.0


def eigh(h: np.ndarray, check_residual: bool = True) -> EigenSystem:
    """Decompose a Hermitian matrix, enforcing the accuracy contract.

    Rejects inputs whose asymmetry exceeds 1e-12 relative to the largest
    element; fails if the residual exceeds 1e-8 times the spectral norm.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise EigensolverError(f"expected a square matrix, got shape {h.shape}")
    scale = float(np.abs(h).max()) if h.size else 0.0
    asym = float(np.abs(h - h.conj().T).max())
    if asym > HERMITICITY_RTOL * max(scale, 1.0):
        raise EigensolverError(
            f"matrix is not Hermitian: asymmetry {asym:.3e} exceeds "
            f"{HERMITICITY_RTOL:.0e} relative tolerance")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition did not converge: {exc}") from exc
    if check_residual:
        resid_cols = h @ v - v * w
        residual = float(np.sqrt((np.abs(resid_cols) ** 2).sum(axis=0)).max())
        gram = v.conj().T @ v
        ortho = float(np.abs(gram - np.eye(len(w))).max())
        norm = float(np.abs(w).max()) if len(w) else 0.0
        if residual > RESIDUAL_RTOL * max(norm, np.finfo(float).tiny):
            raise EigensolverError(
                f"residual contract violated: worst ||Hv - Ev|| = {residual:.3e} "
                f"against bound {RESIDUAL_RTOL * norm:.3e}")
        if ortho > RESIDUAL_RTOL:
            raise EigensolverError(
                f"orthonormality contract violated: max |V+V - I| = {ortho:.3e}")
    else:
        residual, ortho = float("nan"), float("nan")
    w.flags.writeable = False
    v.flags.writeable = False
    return EigenSystem(eigenvalues=w, eigenvectors=v, residual=residual,
                       orthonormality=ortho)


def evolve(eig: EigenSystem, psi0: np.ndarray, t: float) -> np.ndarray:
    """psi(t) = V exp(-i E t) V^dag psi0."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (eig.n,):
        raise ValueError(f"state has length {psi0.shape}, expected {eig.n}")
    coeff = eig.eigenvectors.conj().T @ psi0
    return eig.eigenvectors @ (np.exp(-1j * eig.eigenvalues * t) * coeff)


def evolve_series(eig: EigenSystem, psi0: np.ndarray, grid) -> np.ndarray:
    """Evolve one state over a strictly increasing time grid.

    Returns an array of shape (len(grid), n); the transform of psi0 into the
    eigenbasis is computed once and reused for every time.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("time grid must not be empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    psi0 = np.asarray(psi0, dtype=complex)
    coeff = eig.eigenvectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(eig.eigenvalues, grid))
    return (eig.eigenvectors @ (phases * coeff[:, None])).T


def oracle_evolve(h: np.ndarray, psi0: np.ndarray, t: float,
                  step_bound: float = 0.5, max_terms: int = 60) -> np.ndarray:
    """Independent propagation oracle: scaled Taylor series applied to the vector.

    Splits t into steps with ||H||_inf * |dt| <= step_bound and sums the series
    exp(-i H dt) psi term by term until the term norm falls below 1e-16.
    Intended for cross-checking the spectral propagator on small systems.
    """
    h = np.asarray(h, dtype=complex)
    psi = np.asarray(psi0, dtype=complex).copy()
    if t == 0:
        return psi
    hnorm = float(np.abs(h).sum(axis=1).max())
    n_steps = max(1, int(np.ceil(hnorm * abs(t) / step_bound)))
    dt = t / n_steps
    for _ in range(n_steps):
        term = psi.copy()
        acc = psi.copy()
        for k in range(1, max_terms + 1):
            term = (-1j * dt / k) * (h @ term)
            acc += term
            if float(np.linalg.norm(term)) < 1e-16:
                break
        else:
            raise ConvergenceError(
                f"Taylor series did not converge within {max_terms} terms "
                f"(||H||*dt = {hnorm * abs(dt):.3f})")
        psi = acc
    return psi


@dataclass
class Trajectory:
    """Time series of observables for one run.

    `columns` maps observable names (the trajectory CSV schema plus derived
    |rho_ij| magnitudes) to per-time arrays; every record carries the state
    norm under the "norm" key.
    """

    times: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory time grid must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        """Load a trajectory CSV, recomputing the derived |rho_ij| columns."""
        import csv as _csv

        with open(path, newline="") as fh:
            reader = _csv.reader(fh)
            header = next(reader)
            rows = [[float(x) for x in row] for row in reader]
        data = np.asarray(rows)
        columns = {name: data[:, k] for k, name in enumerate(header) if name != "t"}
        times = data[:, header.index("t")]
        for name in list(columns):
            if name.startswith("rho_re_"):
                suffix = name[len("rho_re_"):]
                im = columns.get(f"rho_im_{suffix}")
                if im is not None:
                    columns[f"abs_rho_{suffix}"] = np.hypot(columns[name], im)
        return cls(times=times, columns=columns)
