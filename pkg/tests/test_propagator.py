import numpy as np
import pytest

from qrelax.ensemble import normal_deviates
from qrelax.errors import EigensolverError
from qrelax.propagator import (EigenSystem, Trajectory, eigh, evolve,
                               evolve_series, oracle_evolve)
from tests.conftest import random_state


def random_hermitian(n, seed, scale=1.0):
    dev = normal_deviates(seed, 2 * n * n).reshape(2, n, n)
    a = (dev[0] + 1j * dev[1]) * scale
    return (a + a.conj().T) / 2


class TestEigh:
    def test_pauli_x(self):
        sys = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(sys.eigenvalues, [-1.0, 1.0])

    def test_diagonal_matrix(self):
        d = np.diag([3.0, -1.0, 2.0]).astype(complex)
        sys = eigh(d)
        assert np.allclose(sys.eigenvalues, [-1.0, 2.0, 3.0])
        assert np.allclose(np.abs(sys.eigenvectors),
                           np.eye(3)[:, [1, 2, 0]], atol=1e-12)

    def test_random_hermitian_contract(self):
        h = random_hermitian(100, seed=8)
        sys = eigh(h)
        assert sys.residual <= 1e-8 * sys.spectral_norm
        assert sys.orthonormality <= 1e-8
        assert np.all(np.diff(sys.eigenvalues) >= 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(EigensolverError, match="not Hermitian"):
            eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(EigensolverError, match="square"):
            eigh(np.zeros((2, 3)))


class TestEvolve:
    def test_time_zero_is_identity(self):
        h = random_hermitian(16, seed=2)
        sys = eigh(h)
        psi0 = random_state(16, seed=3)
        assert np.abs(evolve(sys, psi0, 0.0) - psi0).max() < 1e-12

    def test_eigenvector_is_stationary(self):
        h = random_hermitian(12, seed=4)
        sys = eigh(h)
        v = sys.eigenvectors[:, 5]
        psi_t = evolve(sys, v, 3.7)
        # only a global phase: overlap magnitude 1, all populations unchanged
        assert abs(abs(np.vdot(v, psi_t)) - 1.0) < 1e-12
        assert np.abs(np.abs(psi_t) ** 2 - np.abs(v) ** 2).max() < 1e-12

    @pytest.mark.parametrize("g,t", [(1.0, 0.3), (0.25, 2.0), (2.0, 5.5)])
    def test_rabi_oscillation(self, g, t):
        sys = eigh(np.array([[0.0, g], [g, 0.0]]))
        psi_t = evolve(sys, np.array([1.0, 0.0], dtype=complex), t)
        assert abs(abs(psi_t[1]) ** 2 - np.sin(g * t) ** 2) < 1e-9

    def test_norm_preserved(self):
        h = random_hermitian(64, seed=5)
        sys = eigh(h)
        psi0 = random_state(64, seed=6)
        for t in (0.1, 1.0, 50.0):
            assert abs(np.linalg.norm(evolve(sys, psi0, t)) - 1.0) < 1e-9

    def test_time_reversal(self):
        h = random_hermitian(48, seed=7)
        sys = eigh(h)
        psi0 = random_state(48, seed=8)
        back = evolve(sys, evolve(sys, psi0, 13.0), -13.0)
        assert np.abs(back - psi0).max() < 1e-9

    def test_energy_conserved(self):
        h = random_hermitian(32, seed=9)
        sys = eigh(h)
        psi0 = random_state(32, seed=10)
        e0 = np.vdot(psi0, h @ psi0).real
        for t in (0.5, 4.0, 40.0):
            psi_t = evolve(sys, psi0, t)
            e_t = np.vdot(psi_t, h @ psi_t).real
            assert abs(e_t - e0) < 1e-9 * max(abs(e0), 1.0)


class TestEvolveSeries:
    def test_single_zero_grid(self):
        sys = eigh(random_hermitian(8, seed=11))
        psi0 = random_state(8, seed=12)
        out = evolve_series(sys, psi0, [0.0])
        assert out.shape == (1, 8)
        assert np.abs(out[0] - psi0).max() < 1e-12

    def test_matches_individual_evolve_calls(self):
        sys = eigh(random_hermitian(20, seed=13))
        psi0 = random_state(20, seed=14)
        grid = np.linspace(0.0, 7.0, 29)
        series = evolve_series(sys, psi0, grid)
        for k, t in enumerate(grid):
            assert np.abs(series[k] - evolve(sys, psi0, t)).max() < 1e-12

    def test_rejects_empty_and_non_increasing(self):
        sys = eigh(random_hermitian(4, seed=15))
        psi0 = random_state(4, seed=16)
        with pytest.raises(ValueError, match="empty"):
            evolve_series(sys, psi0, [])
        with pytest.raises(ValueError, match="increasing"):
            evolve_series(sys, psi0, [0.0, 1.0, 1.0])


class TestOracleEvolve:
    def test_time_zero_exact(self):
        h = random_hermitian(10, seed=17)
        psi0 = random_state(10, seed=18)
        assert np.array_equal(oracle_evolve(h, psi0, 0.0), psi0)

    def test_agrees_with_spectral_propagator(self):
        worst = 0.0
        for seed in range(50):
            h = random_hermitian(64, seed=100 + seed, scale=0.25)
            sys = eigh(h)
            psi0 = random_state(64, seed=200 + seed)
            t = 1.0 + (seed % 7)
            diff = np.abs(oracle_evolve(h, psi0, t) - evolve(sys, psi0, t)).max()
            worst = max(worst, diff)
        assert worst < 1e-7

    def test_semigroup_composition(self):
        h = random_hermitian(24, seed=19)
        psi0 = random_state(24, seed=20)
        half = oracle_evolve(h, oracle_evolve(h, psi0, 1.1), 1.1)
        full = oracle_evolve(h, psi0, 2.2)
        assert np.abs(half - full).max() < 1e-8


class TestTrajectory:
    def test_requires_increasing_times(self):
        with pytest.raises(ValueError, match="increasing"):
            Trajectory(times=np.array([0.0, 0.0]), columns={})

    def test_eigen_system_immutable_arrays(self):
        sys = eigh(random_hermitian(6, seed=21))
        assert isinstance(sys, EigenSystem)
        with pytest.raises(ValueError):
            sys.eigenvalues[0] = 0.0
