import numpy as np
import pytest

from gravdec.core import PhysicalConstants, Scenario
from gravdec.ensemble import FrequencyDistribution, StateTemplate, sample_partition


@pytest.fixture
def consts():
    return PhysicalConstants()


@pytest.fixture
def scenario():
    return Scenario(1e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(20161103)


@pytest.fixture(scope="session")
def fig1b_partition():
    return sample_partition(FrequencyDistribution.uniform(1e11, 5e11), 1000, 1000, 1,
                            StateTemplate(alpha=1.0, temperature=10.0), seed=2016)


def time_for_phase(dphi, omega, scenario):
    """Time at which a mode of frequency ``omega`` accumulates phase ``dphi``."""
    return dphi / scenario.phase_rate(omega)
