import numpy as np
import pytest

from qrelax.model import CouplingMode, SpectrumSpec


@pytest.fixture
def micro_spec():
    return SpectrumSpec(gas_levels=[0.0, 1.0], container_levels=[(0.0, 50)],
                        alpha=0.005, coupling_mode=CouplingMode.MICROCANONICAL)


@pytest.fixture
def canonical_spec():
    return SpectrumSpec(gas_levels=[0.0, 1.0],
                        container_levels=[(0.0, 50), (1.0, 100), (2.0, 200)],
                        alpha=0.005, coupling_mode=CouplingMode.CANONICAL)


@pytest.fixture
def tiny_canonical_spec():
    return SpectrumSpec(gas_levels=[0.0, 1.0],
                        container_levels=[(0.0, 2), (1.0, 2), (2.0, 2)],
                        alpha=0.05, coupling_mode=CouplingMode.CANONICAL)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return psi / np.linalg.norm(psi)
