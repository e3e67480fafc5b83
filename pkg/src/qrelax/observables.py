"""Measurements on pure states of the composite system.

All reductions rely on the canonical basis order (gas index outermost), which
makes the partial trace over the container a contiguous reshape.  Batched
variants operate on arrays of states stacked along the last axis; they are
exact vectorizations of the single-state operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError
from .model import BasisIndex, ShellMap

EIGENVALUE_FLOOR = -1e-8


@dataclass(frozen=True)
class ReducedDensityMatrix:
    """Hermitian, unit-trace gas density matrix with convenience accessors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise InvalidStateError("reduced density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10 or abs(np.trace(m).imag) > 1e-10:
            raise InvalidStateError("reduced density matrix trace differs from 1")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def occupations(self) -> np.ndarray:
        """Diagonal probabilities of the gas basis states."""
        return self.matrix.diagonal().real.copy()

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def entropy(self) -> float:
        return entropy(self)


@dataclass(frozen=True)
class ShellDistribution:
    """Probability of each total-energy shell plus the mean energy."""

    energies: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        if abs(self.probabilities.sum() - 1.0) > 1e-10:
            raise InvalidStateError("shell probabilities do not sum to 1")

    @property
    def mean_energy(self) -> float:
        return float(np.dot(self.probabilities, self.energies))


def _check_norm(psi: np.ndarray, tol: float = 1e-9) -> None:
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol:
        raise InvalidStateError(f"state norm {norm} differs from 1 beyond {tol}")


def reduce_gas(psi: np.ndarray, basis: BasisIndex) -> ReducedDensityMatrix:
    """Partial trace of |psi><psi| over the container."""
    psi = np.asarray(psi)
    _check_norm(psi)
    x = psi.reshape(basis.n_gas, basis.n_container)
    return ReducedDensityMatrix(matrix=x @ x.conj().T)


def reduce_gas_batch(psis: np.ndarray, basis: BasisIndex) -> np.ndarray:
    """Gas density matrices for states stacked as columns; shape (T, ng, ng)."""
    x = psis.reshape(basis.n_gas, basis.n_container, -1)
    return np.einsum("icb,jcb->bij", x, x.conj())


def _eigenvalue_probabilities(rho: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < EIGENVALUE_FLOOR:
        raise InvalidStateError(
            f"density matrix has eigenvalue {lam.min():.3e} below {EIGENVALUE_FLOOR:.0e}")
    return np.clip(lam, 0.0, 1.0)


def entropy(rho: ReducedDensityMatrix | np.ndarray) -> float:
    """Von Neumann entropy -Tr(rho ln rho) in units of k_B (0 ln 0 := 0)."""
    m = rho.matrix if isinstance(rho, ReducedDensityMatrix) else np.asarray(rho)
    lam = _eigenvalue_probabilities(m)
    nz = lam[lam > 0.0]
    return float(-(nz * np.log(nz)).sum())


def entropy_batch(rhos: np.ndarray) -> np.ndarray:
    """Entropies of a stack of density matrices, shape (T, n, n) -> (T,)."""
    lam = np.linalg.eigvalsh(rhos)
    if lam.min() < EIGENVALUE_FLOOR:
        raise InvalidStateError(
            f"density matrix has eigenvalue {lam.min():.3e} below {EIGENVALUE_FLOOR:.0e}")
    lam = np.clip(lam, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0.0, lam * np.log(np.where(lam > 0.0, lam, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def reduce_container_levels(psi: np.ndarray, basis: BasisIndex) -> np.ndarray:
    """Occupation probability of each container energy level (slots summed)."""
    psi = np.asarray(psi)
    _check_norm(psi)
    return reduce_container_levels_batch(psi[:, None], basis)[:, 0]


def reduce_container_levels_batch(psis: np.ndarray, basis: BasisIndex) -> np.ndarray:
    """Level occupations for stacked states; shape (n_levels, T)."""
    prob = (np.abs(psis) ** 2).reshape(basis.n_gas, basis.n_container, -1).sum(axis=0)
    return np.add.reduceat(prob, basis.container_offsets, axis=0)


def shell_distribution(psi: np.ndarray, shells: ShellMap) -> ShellDistribution:
    """Probability carried by each total-energy shell."""
    psi = np.asarray(psi)
    _check_norm(psi)
    probs = shell_probabilities_batch(psi[:, None], shells)[:, 0]
    return ShellDistribution(energies=shells.energies.copy(), probabilities=probs)


def shell_probabilities_batch(psis: np.ndarray, shells: ShellMap) -> np.ndarray:
    """Per-shell probabilities for stacked states; shape (n_shells, T)."""
    order = np.argsort(shells.shell_id, kind="stable")
    starts = np.searchsorted(shells.shell_id[order], np.arange(shells.n_shells))
    prob = (np.abs(psis) ** 2)[order]
    return np.add.reduceat(prob, starts, axis=0)
