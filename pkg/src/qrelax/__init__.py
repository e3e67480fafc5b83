"""Unitary relaxation of a small quantum subsystem in a degenerate environment.

The package simulates a bipartite "gas + container" system with a seeded
random Hermitian interaction, evolves pure states exactly by diagonalization,
measures local observables (reduced density matrix, entropy, occupations), and
compares equilibrium windows against state-counting predictions and
least-squares fits.
"""

from .analysis import (EquilibriumPrediction, FitResult, MixturePrediction,
                       WindowStats, fit_exponential, fit_inverse_size,
                       predict_equilibrium, predict_equilibrium_mixture,
                       window_stats)
from .config import ExperimentConfig, parse_config, parse_config_file
from .ensemble import (InteractionMatrix, RngStream, assemble_hamiltonian,
                       gaussian_stream, normal_deviates, sample_interaction,
                       splitmix64)
from .errors import (ConfigError, ConvergenceError, EigensolverError, FitError,
                     InvalidStateError, PredictionError, QrelaxError,
                     WindowError)
from .model import (BasisIndex, CouplingMask, CouplingMode,
                    CouplingRegimeWarning, InitialState, ShellMap,
                    SpectrumSpec, build_basis, build_h0, build_initial_state,
                    build_shell_map, coupling_mask)
from .observables import (ReducedDensityMatrix, ShellDistribution, entropy,
                          reduce_container_levels, reduce_gas,
                          shell_distribution)
from .propagator import (EigenSystem, Trajectory, eigh, evolve, evolve_series,
                         oracle_evolve)
from .runner import RunArtifacts, SweepResult, run_experiment, run_sweep

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
