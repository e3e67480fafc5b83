"""Abstract two-subsystem model: spectra, product basis, couplings, initial states.

The system is a small "gas" subsystem tensored with a larger "container"
subsystem.  Both are specified purely by their energy levels and degeneracies;
there is no spatial structure.  The unperturbed Hamiltonian is diagonal in the
product basis, and the interaction is restricted by a coupling mask that either
forbids any energy exchange between the subsystems (microcanonical) or allows
exchange only within shells of constant total unperturbed energy (canonical).
"""

from __future__ import annotations

import enum
import hashlib
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class CouplingMode(str, enum.Enum):
    MICROCANONICAL = "microcanonical"
    CANONICAL = "canonical"


class CouplingRegimeWarning(UserWarning):
    """Raised when the coupling strength is outside the validated weak regime."""


def _as_levels(levels) -> tuple[tuple[float, int], ...]:
    """Normalize a level list to ((energy, degeneracy), ...) tuples."""
    out = []
    for entry in levels:
        if isinstance(entry, (int, float)):
            energy, deg = float(entry), 1
        else:
            energy, deg = entry
        out.append((float(energy), int(deg)))
    return tuple(out)


@dataclass(frozen=True)
class SpectrumSpec:
    """Energy spectra of gas and container plus coupling mode and strength.

    Levels are (energy, degeneracy) pairs with strictly increasing energies.
    Gas levels are non-degenerate in all bundled scenarios, but degenerate gas
    levels are supported: degenerate copies are flattened into distinct gas
    basis states sharing one level energy.
    """

    gas_levels: tuple[tuple[float, int], ...]
    container_levels: tuple[tuple[float, int], ...]
    alpha: float
    delta_e: float = 1.0
    coupling_mode: CouplingMode = CouplingMode.CANONICAL

    def __post_init__(self):
        object.__setattr__(self, "gas_levels", _as_levels(self.gas_levels))
        object.__setattr__(self, "container_levels", _as_levels(self.container_levels))
        object.__setattr__(self, "coupling_mode", CouplingMode(self.coupling_mode))
        for name, levels in (("gas", self.gas_levels), ("container", self.container_levels)):
            if not levels:
                raise ValueError(f"{name} level list must not be empty")
            energies = [e for e, _ in levels]
            if any(b <= a for a, b in zip(energies, energies[1:])):
                raise ValueError(f"{name} energies must be strictly increasing")
            if any(d < 1 for _, d in levels):
                raise ValueError(f"{name} degeneracies must be >= 1")
        if self.delta_e <= 0:
            raise ValueError("delta_e must be > 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.n_total < 2:
            raise ValueError("total dimension must be >= 2")
        if self.alpha >= 1:
            warnings.warn(
                f"alpha={self.alpha} is outside the validated weak-coupling regime"
                " (alpha < 1); results are accepted but unvalidated",
                CouplingRegimeWarning,
                stacklevel=2,
            )

    @property
    def n_gas(self) -> int:
        """Number of gas basis states (levels weighted by degeneracy)."""
        return sum(d for _, d in self.gas_levels)

    @property
    def n_container(self) -> int:
        return sum(d for _, d in self.container_levels)

    @property
    def n_total(self) -> int:
        return self.n_gas * self.n_container

    @cached_property
    def gas_state_energies(self) -> np.ndarray:
        return np.repeat([e for e, _ in self.gas_levels], [d for _, d in self.gas_levels])

    @cached_property
    def gas_state_level(self) -> np.ndarray:
        """Level index of each flattened gas basis state."""
        degs = [d for _, d in self.gas_levels]
        return np.repeat(np.arange(len(degs)), degs)

    @cached_property
    def container_level_energies(self) -> np.ndarray:
        return np.array([e for e, _ in self.container_levels])

    @cached_property
    def container_degeneracies(self) -> np.ndarray:
        return np.array([d for _, d in self.container_levels], dtype=np.int64)

    @cached_property
    def container_level_offsets(self) -> np.ndarray:
        """Start index of each container level in the flattened container space."""
        return np.concatenate([[0], np.cumsum(self.container_degeneracies)[:-1]])

    @property
    def energy_tolerance(self) -> float:
        """Two unperturbed energies within this distance count as equal."""
        return 1e-9 * self.delta_e

    def gas_degeneracy_at(self, energy: float) -> int:
        tol = self.energy_tolerance
        return sum(d for e, d in self.gas_levels if abs(e - energy) <= tol)

    def container_degeneracy_at(self, energy: float) -> int:
        tol = self.energy_tolerance
        return sum(d for e, d in self.container_levels if abs(e - energy) <= tol)

    def stable_hash(self) -> str:
        """Hex digest identifying the spectrum, mode and coupling strength."""
        text = repr((self.gas_levels, self.container_levels, self.alpha,
                     self.delta_e, self.coupling_mode.value))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class BasisIndex:
    """Bijection between flat indices and (gas state i, container level m, slot s).

    Canonical order: gas state outermost, then container level, then slot, so
    flat = i * n_container + offset(m) + (s - 1).  Slots are 1-based.
    """

    gas_state: np.ndarray
    gas_level: np.ndarray
    container_level: np.ndarray
    container_slot: np.ndarray
    container_offsets: np.ndarray
    n_gas: int
    n_container: int

    def __len__(self) -> int:
        return self.n_gas * self.n_container

    def flat_index(self, i: int, m: int, s: int) -> int:
        if not (0 <= i < self.n_gas):
            raise IndexError(f"gas state {i} out of range")
        if not (0 <= m < len(self.container_offsets)):
            raise IndexError(f"container level {m} out of range")
        start = int(self.container_offsets[m])
        end = self.n_container if m + 1 == len(self.container_offsets) \
            else int(self.container_offsets[m + 1])
        if not (1 <= s <= end - start):
            raise IndexError(f"slot {s} out of range for container level {m}")
        return i * self.n_container + start + (s - 1)

    def triple(self, flat: int) -> tuple[int, int, int]:
        if not (0 <= flat < len(self)):
            raise IndexError(f"flat index {flat} out of range")
        return (int(self.gas_state[flat]), int(self.container_level[flat]),
                int(self.container_slot[flat]))


def build_basis(spec: SpectrumSpec) -> BasisIndex:
    """Enumerate the product basis of a spectrum in canonical order."""
    n_g, n_c = spec.n_gas, spec.n_container
    degs = spec.container_degeneracies
    level_per_cstate = np.repeat(np.arange(len(degs)), degs)
    slot_per_cstate = np.concatenate([np.arange(1, d + 1) for d in degs])
    arrays = dict(
        gas_state=np.repeat(np.arange(n_g), n_c),
        gas_level=np.repeat(spec.gas_state_level, n_c),
        container_level=np.tile(level_per_cstate, n_g),
        container_slot=np.tile(slot_per_cstate, n_g),
        container_offsets=spec.container_level_offsets.copy(),
    )
    for a in arrays.values():
        a.flags.writeable = False
    return BasisIndex(n_gas=n_g, n_container=n_c, **arrays)


def build_h0(spec: SpectrumSpec, basis: BasisIndex) -> np.ndarray:
    """Diagonal of the unperturbed Hamiltonian: E^g(i) + E^c(m) per basis state."""
    energies = (spec.gas_state_energies[basis.gas_state]
                + spec.container_level_energies[basis.container_level])
    energies.flags.writeable = False
    return energies


@dataclass(frozen=True)
class ShellMap:
    """Partition of the basis into shells of equal total unperturbed energy."""

    energies: np.ndarray
    shell_id: np.ndarray
    tolerance: float

    @property
    def n_shells(self) -> int:
        return len(self.energies)

    def members(self, shell: int) -> np.ndarray:
        return np.nonzero(self.shell_id == shell)[0]


def build_shell_map(spec: SpectrumSpec, basis: BasisIndex) -> ShellMap:
    """Group basis states whose total energies agree within the shell tolerance."""
    h0 = build_h0(spec, basis)
    tol = spec.energy_tolerance
    order = np.argsort(h0, kind="stable")
    sorted_e = h0[order]
    # new shell wherever the gap to the previous sorted energy exceeds tol
    breaks = np.nonzero(np.diff(sorted_e) > tol)[0]
    ids_sorted = np.zeros(len(h0), dtype=np.int64)
    ids_sorted[breaks + 1] = 1
    ids_sorted = np.cumsum(ids_sorted)
    shell_id = np.empty(len(h0), dtype=np.int64)
    shell_id[order] = ids_sorted
    n_shells = int(ids_sorted[-1]) + 1
    energies = np.array([sorted_e[ids_sorted == k].mean() for k in range(n_shells)])
    shell_id.flags.writeable = False
    energies.flags.writeable = False
    return ShellMap(energies=energies, shell_id=shell_id, tolerance=tol)


@dataclass(frozen=True)
class CouplingMask:
    """Which interaction matrix elements are allowed to be nonzero.

    States sharing a block id are mutually coupled (including the diagonal);
    all other entries are forced to zero.  Microcanonical blocks are the
    (gas level, container level) groups; canonical blocks are the shells.
    """

    mode: CouplingMode
    block_id: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.block_id)

    def allows(self, a: int, b: int) -> bool:
        return bool(self.block_id[a] == self.block_id[b])

    def matrix(self) -> np.ndarray:
        """Materialize the full boolean mask (test-sized systems only)."""
        return self.block_id[:, None] == self.block_id[None, :]


def coupling_mask(spec: SpectrumSpec, basis: BasisIndex) -> CouplingMask:
    mode = spec.coupling_mode
    if mode is CouplingMode.MICROCANONICAL:
        n_clevels = len(spec.container_levels)
        block = basis.gas_level * n_clevels + basis.container_level
    else:
        block = build_shell_map(spec, basis).shell_id.copy()
    block = np.ascontiguousarray(block, dtype=np.int64)
    block.flags.writeable = False
    return CouplingMask(mode=mode, block_id=block)


@dataclass(frozen=True)
class InitialState:
    """Product initial state: gas amplitudes times one container state.

    The container part is either a single basis slot (level m, slot s) or an
    explicit amplitude vector over the flattened container space.
    """

    gas_amplitudes: np.ndarray
    container_level: int | None = None
    container_slot: int = 1
    container_amplitudes: np.ndarray | None = None

    @classmethod
    def from_gas_probability(cls, p0: float, container_level: int,
                             container_slot: int = 1, phase: float = 0.0) -> "InitialState":
        """Two-level gas with ground-state probability p0 and relative phase."""
        if not 0.0 <= p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")
        amps = np.array([np.sqrt(p0), np.exp(1j * phase) * np.sqrt(1.0 - p0)])
        return cls(gas_amplitudes=amps, container_level=container_level,
                   container_slot=container_slot)

    @classmethod
    def from_gas_state(cls, state: int, n_gas: int, container_level: int,
                       container_slot: int = 1) -> "InitialState":
        amps = np.zeros(n_gas, dtype=complex)
        amps[state] = 1.0
        return cls(gas_amplitudes=amps, container_level=container_level,
                   container_slot=container_slot)


def build_initial_state(init: InitialState, basis: BasisIndex) -> np.ndarray:
    """Assemble the normalized product state vector over the full basis."""
    gas = np.asarray(init.gas_amplitudes, dtype=complex)
    if gas.shape != (basis.n_gas,):
        raise ValueError(f"gas amplitudes must have length {basis.n_gas}")
    if abs(np.linalg.norm(gas) - 1.0) > 1e-12:
        raise ValueError("gas amplitudes must be unit-norm (tolerance 1e-12)")
    if init.container_amplitudes is not None:
        cont = np.asarray(init.container_amplitudes, dtype=complex)
        if cont.shape != (basis.n_container,):
            raise ValueError(f"container amplitudes must have length {basis.n_container}")
        if abs(np.linalg.norm(cont) - 1.0) > 1e-12:
            raise ValueError("container amplitudes must be unit-norm (tolerance 1e-12)")
    else:
        if init.container_level is None:
            raise ValueError("initial state needs a container level or amplitude vector")
        cont = np.zeros(basis.n_container, dtype=complex)
        flat = basis.flat_index(0, init.container_level, init.container_slot)
        cont[flat] = 1.0
    psi = np.kron(gas, cont)
    psi.flags.writeable = False
    return psi
