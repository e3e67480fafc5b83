"""Seeded sampling of the masked Gaussian Hermitian interaction matrix.

The deviate stream is fully pinned so that (spectrum, seed) reproduces the
interaction bit-for-bit: a SplitMix64 counter generator feeds the trigonometric
Box-Muller transform, and deviates are consumed in row-major order over the
allowed upper triangle -- for each row the diagonal entry first, then for each
allowed off-diagonal entry its real part followed by its imaginary part.

Scale conventions: diagonal entries have standard deviation sqrt(2)*delta_e*alpha,
real and imaginary parts of off-diagonal entries each have standard deviation
delta_e*alpha (the unitarily invariant Gaussian Hermitian ensemble).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import CouplingMask, SpectrumSpec

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * np.pi
_INV_2_53 = float(2.0 ** -53)


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Outputs ``offset .. offset+count-1`` of the SplitMix64 stream for a seed.

    The k-th output mixes the state ``seed + (k+1) * golden_gamma`` (mod 2^64),
    so any window of the stream can be generated without advancing through the
    preceding values.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def normal_deviates(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Standard normal deviates ``offset .. offset+count-1`` of the seeded stream.

    Consecutive SplitMix64 outputs 2p and 2p+1 are mapped to uniforms
    u1 = ((z >> 11) + 1) * 2^-53 in (0, 1] and u2 = (z >> 11) * 2^-53 in [0, 1);
    deviate 2p is sqrt(-2 ln u1) cos(2 pi u2) and deviate 2p+1 the matching sine.
    """
    if count == 0:
        return np.empty(0)
    first_pair, last_pair = offset // 2, (offset + count - 1) // 2
    n_pairs = last_pair - first_pair + 1
    z = splitmix64(seed, 2 * n_pairs, offset=2 * first_pair)
    u1 = ((z[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = (z[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2_53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = _TWO_PI * u2
    out = np.empty(2 * n_pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    start = offset - 2 * first_pair
    return out[start:start + count]


def gaussian_stream(seed: int, chunk: int = 4096) -> Iterator[float]:
    """Infinite iterator over the seeded deviate sequence of `normal_deviates`."""
    offset = 0
    while True:
        block = normal_deviates(seed, chunk, offset=offset)
        yield from block.tolist()
        offset += chunk


@dataclass(frozen=True)
class RngStream:
    """Stateful view of the deviate sequence for a seed (counter-based)."""

    seed: int

    def take(self, count: int, offset: int = 0) -> np.ndarray:
        return normal_deviates(self.seed, count, offset=offset)


@dataclass(frozen=True)
class InteractionMatrix:
    """Sampled Hermitian interaction with its generating seed and scale."""

    matrix: np.ndarray
    seed: int
    alpha: float
    mask: CouplingMask

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _allowed_upper_pairs(mask: CouplingMask) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (row, col) arrays of allowed strict upper-triangle entries."""
    block = mask.block_id
    rows_parts, cols_parts = [], []
    for b in np.unique(block):
        members = np.nonzero(block == b)[0]
        k = len(members)
        if k < 2:
            continue
        iu, ju = np.triu_indices(k, k=1)
        rows_parts.append(members[iu])
        cols_parts.append(members[ju])
    if not rows_parts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    rows = np.concatenate(rows_parts)
    cols = np.concatenate(cols_parts)
    order = np.lexsort((cols, rows))
    return rows[order], cols[order]


def sample_interaction(spec: SpectrumSpec, mask: CouplingMask, seed: int) -> InteractionMatrix:
    """Draw the masked Gaussian Hermitian interaction for (spec, seed)."""
    if spec.alpha <= 0:
        raise ValueError("alpha must be > 0")
    n = spec.n_total
    if mask.n_states != n:
        raise ValueError("mask dimension does not match the spectrum")
    sigma_diag = np.sqrt(2.0) * spec.delta_e * spec.alpha
    sigma_off = spec.delta_e * spec.alpha

    rows, cols = _allowed_upper_pairs(mask)
    # deviate budget per row: 1 for the diagonal entry, 2 per allowed off-diagonal
    per_row_offd = np.bincount(rows, minlength=n)
    row_start = np.zeros(n, dtype=np.int64)
    row_start[1:] = np.cumsum(1 + 2 * per_row_offd)[:-1]
    deviates = normal_deviates(seed, n + 2 * int(per_row_offd.sum()))

    h = np.zeros((n, n), dtype=complex)
    h[np.arange(n), np.arange(n)] = sigma_diag * deviates[row_start]
    if len(rows):
        first_pair_of_row = np.searchsorted(rows, np.arange(n))
        pos_in_row = np.arange(len(rows)) - first_pair_of_row[rows]
        re_idx = row_start[rows] + 1 + 2 * pos_in_row
        values = sigma_off * (deviates[re_idx] + 1j * deviates[re_idx + 1])
        h[rows, cols] = values
        h[cols, rows] = np.conj(values)
    h.flags.writeable = False
    return InteractionMatrix(matrix=h, seed=seed, alpha=spec.alpha, mask=mask)


def assemble_hamiltonian(h0: np.ndarray, hint: InteractionMatrix | np.ndarray) -> np.ndarray:
    """Total Hamiltonian: diagonal unperturbed part plus sampled interaction."""
    hmat = hint.matrix if isinstance(hint, InteractionMatrix) else np.asarray(hint)
    h0 = np.asarray(h0, dtype=float)
    if hmat.shape != (len(h0), len(h0)):
        raise ValueError(f"dimension mismatch: h0 has {len(h0)} entries, "
                         f"interaction is {hmat.shape}")
    total = hmat.astype(complex, copy=True)
    total[np.arange(len(h0)), np.arange(len(h0))] += h0
    total.flags.writeable = False
    return total
