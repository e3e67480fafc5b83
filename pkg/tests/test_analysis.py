from fractions import Fraction

import numpy as np
import pytest

from qrelax.analysis import (fit_exponential, fit_inverse_size,
                             predict_equilibrium, predict_equilibrium_mixture,
                             window_stats)
from qrelax.errors import FitError, PredictionError, WindowError
from qrelax.model import SpectrumSpec
from qrelax.observables import ShellDistribution
from qrelax.propagator import Trajectory


def spec_50_100_200(alpha=0.005):
    return SpectrumSpec(gas_levels=[0.0, 1.0],
                        container_levels=[(0.0, 50), (1.0, 100), (2.0, 200)],
                        alpha=alpha)


class TestPredictEquilibrium:
    def test_two_thirds_exact(self):
        pred = predict_equilibrium(spec_50_100_200(), u=2.0)
        assert pred.probabilities[0] == 2.0 / 3.0
        assert pred.probabilities[1] == 1.0 / 3.0

    def test_five_level_doubling_scheme(self):
        # container degeneracy 6 * 2^E: prediction is (16/31) * 2^-E at U = 4
        spec = SpectrumSpec(gas_levels=[0.0, 1.0, 2.0, 3.0, 4.0],
                            container_levels=[(0.0, 6), (1.0, 12), (2.0, 24),
                                              (3.0, 48), (4.0, 96)],
                            alpha=0.01)
        pred = predict_equilibrium(spec, u=4.0)
        exact = [Fraction(16, 31) / 2 ** k for k in range(5)]
        for got, want in zip(pred.probabilities, exact):
            assert abs(got - float(want)) < 1e-15
        assert abs(pred.probabilities[0] - 0.516) < 1e-3

    def test_uniform_when_degeneracies_equal(self):
        spec = SpectrumSpec(gas_levels=[0.0, 1.0, 2.0],
                            container_levels=[(0.0, 7), (1.0, 7), (2.0, 7),
                                              (3.0, 7), (4.0, 7)],
                            alpha=0.01)
        pred = predict_equilibrium(spec, u=2.0)
        assert np.allclose(pred.probabilities, [1 / 3] * 3, atol=1e-15)

    def test_unreachable_energy_raises(self):
        with pytest.raises(PredictionError, match="weights"):
            predict_equilibrium(spec_50_100_200(), u=50.0)

    def test_missing_levels_contribute_zero(self):
        # U = 0: only gas level 0 pairs with container level 0
        pred = predict_equilibrium(spec_50_100_200(), u=0.0)
        assert pred.probabilities.tolist() == [1.0, 0.0]

    def test_invariant_under_degeneracy_rescaling(self):
        base = spec_50_100_200()
        scaled = SpectrumSpec(gas_levels=[0.0, 1.0],
                              container_levels=[(0.0, 150), (1.0, 300), (2.0, 600)],
                              alpha=0.005)
        for u in (1.0, 2.0, 3.0):
            a = predict_equilibrium(base, u).probabilities
            b = predict_equilibrium(scaled, u).probabilities
            assert np.abs(a - b).max() < 1e-15

    def test_exponential_scheme_prediction_independent_of_u(self):
        # degeneracy ~ 5 * 3^E: geometric weights cancel the U dependence
        spec = SpectrumSpec(gas_levels=[0.0, 1.0],
                            container_levels=[(0.0, 5), (1.0, 15), (2.0, 45),
                                              (3.0, 135), (4.0, 405)],
                            alpha=0.01)
        probs = [predict_equilibrium(spec, u).probabilities for u in (1.0, 2.0, 3.0, 4.0)]
        for p in probs[1:]:
            assert np.abs(p - probs[0]).max() < 1e-15
        assert abs(probs[0][0] - 0.75) < 1e-12  # ratio 3:1


class TestPredictEquilibriumMixture:
    def test_single_shell_reduces_to_plain_prediction(self):
        spec = spec_50_100_200()
        dist = ShellDistribution(energies=np.array([0.0, 1.0, 2.0, 3.0]),
                                 probabilities=np.array([0.0, 0.0, 1.0, 0.0]))
        mix = predict_equilibrium_mixture(spec, dist)
        plain = predict_equilibrium(spec, 2.0)
        assert np.abs(mix.gas.probabilities - plain.probabilities).max() < 1e-15

    def test_half_half_mixture_hand_computed(self):
        # within each shell: p(gas 0) = upper container degeneracy / shell size
        # shell E=1: 100/150; shell E=2: 200/300 -> both 2/3
        # container: shell1 gives (50/150, 100/150, 0); shell2 gives (0, 100/300, 200/300)
        spec = spec_50_100_200()
        dist = ShellDistribution(energies=np.array([0.0, 1.0, 2.0, 3.0]),
                                 probabilities=np.array([0.0, 0.5, 0.5, 0.0]))
        mix = predict_equilibrium_mixture(spec, dist)
        assert abs(mix.gas.probabilities[0] - 2 / 3) < 1e-15
        expected_container = 0.5 * np.array([1 / 3, 2 / 3, 0.0]) \
            + 0.5 * np.array([0.0, 1 / 3, 2 / 3])
        assert np.abs(mix.container_probabilities - expected_container).max() < 1e-15
        assert np.allclose(mix.container_probabilities, [1 / 6, 1 / 2, 1 / 3])
        ratio = mix.container_probabilities[1] / mix.container_probabilities[0]
        assert abs(ratio - 3.0) < 1e-12

    def test_rejects_unnormalized(self):
        spec = spec_50_100_200()
        dist = ShellDistribution.__new__(ShellDistribution)
        object.__setattr__(dist, "energies", np.array([2.0]))
        object.__setattr__(dist, "probabilities", np.array([0.7]))
        with pytest.raises(PredictionError, match="normalized"):
            predict_equilibrium_mixture(spec, dist)


def make_traj(times, **columns):
    return Trajectory(times=np.asarray(times, dtype=float),
                      columns={k: np.asarray(v, dtype=float)
                               for k, v in columns.items()})


class TestWindowStats:
    def test_constant_series(self):
        traj = make_traj(np.arange(20.0), x=np.full(20, 3.25))
        ws = window_stats(traj, "x", t_min=5.0)
        assert ws.mean == 3.25
        assert ws.variance == 0.0
        assert ws.count == 15

    def test_population_variance(self):
        values = np.array([1.0, 2.0, 3.0, 4.0] * 5)
        traj = make_traj(np.arange(20.0), x=values)
        ws = window_stats(traj, "x", t_min=0.0)
        assert abs(ws.variance - values.var()) < 1e-15

    def test_window_too_small(self):
        traj = make_traj(np.arange(20.0), x=np.zeros(20))
        with pytest.raises(WindowError, match="samples"):
            window_stats(traj, "x", t_min=15.0)

    def test_empty_window(self):
        traj = make_traj(np.arange(20.0), x=np.zeros(20))
        with pytest.raises(WindowError):
            window_stats(traj, "x", t_min=100.0)

    def test_unknown_column(self):
        traj = make_traj(np.arange(20.0), x=np.zeros(20))
        with pytest.raises(KeyError):
            window_stats(traj, "y", t_min=0.0)


class TestFitExponential:
    def test_recovers_exact_parameters(self):
        amp, beta = 0.53, 0.73
        pts = [(e, amp * np.exp(-beta * e)) for e in range(5)]
        fit = fit_exponential(pts)
        assert abs(fit.params["amplitude"] - amp) < 1e-12
        assert abs(fit.params["beta"] - beta) < 1e-12
        assert fit.residual < 1e-12

    def test_needs_two_points(self):
        with pytest.raises(FitError, match="2 points"):
            fit_exponential([(0.0, 1.0)])

    def test_rejects_nonpositive_probability(self):
        with pytest.raises(FitError, match="positive"):
            fit_exponential([(0.0, 0.5), (1.0, 0.0)])

    def test_noisy_recovery_within_tolerance(self):
        rng = np.random.default_rng(3)
        pts = [(e, 0.5 * np.exp(-0.7 * e) * np.exp(rng.normal(0, 0.01)))
               for e in range(5)]
        fit = fit_exponential(pts)
        assert abs(fit.params["beta"] - 0.7) < 0.05


class TestFitInverseSize:
    def test_exact_inverse_law(self):
        pts = [(n, 0.05 / n) for n in (25, 50, 100, 200)]
        fit = fit_inverse_size(pts)
        assert abs(fit.params["c"] - 0.05) < 1e-15
        assert fit.params["exponent"] == -1.0
        assert abs(fit.params["free_exponent"] + 1.0) < 1e-12
        assert fit.residual < 1e-15

    def test_free_exponent_diagnostic(self):
        pts = [(n, 0.3 * n ** -1.2) for n in (10, 20, 40, 80)]
        fit = fit_inverse_size(pts)
        assert abs(fit.params["free_exponent"] + 1.2) < 1e-9

    def test_needs_three_points(self):
        with pytest.raises(FitError, match="3 points"):
            fit_inverse_size([(10, 0.1), (20, 0.05)])

    def test_rejects_identical_sizes(self):
        with pytest.raises(FitError, match="identical"):
            fit_inverse_size([(10, 0.1), (10, 0.2), (10, 0.3)])

    def test_rejects_nonpositive_sizes(self):
        with pytest.raises(FitError, match="positive"):
            fit_inverse_size([(0, 0.1), (10, 0.2), (20, 0.3)])
