"""Shared fixtures for the igs-smac test suite."""

import numpy as np
import pytest

from src.experiments import preset_canonical, preset_scenario, random_single_user_problem
from src.solvers.model import CanonicalScenario
from src.solvers.single_user import SingleUserProblem


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2017)


@pytest.fixture
def preset_one() -> CanonicalScenario:
    return preset_canonical(1, "default")


@pytest.fixture
def preset_two() -> CanonicalScenario:
    return preset_canonical(2, "default")


@pytest.fixture
def preset_one_physical():
    return preset_scenario(1)


@pytest.fixture
def improper_noise_problem() -> SingleUserProblem:
    """p = 100, p_I = 5, c_I = 0.5, target 3.31 b/s/Hz."""
    return SingleUserProblem.from_improper_noise(
        pu_snr=100.0,
        gain=1.5,
        budget=100.0,
        pu_rate_target=3.31,
        improper_power=5.0,
        improper_circularity=0.5,
    )


@pytest.fixture
def random_problems() -> list[SingleUserProblem]:
    return [random_single_user_problem(2017, trial) for trial in range(60)]


@pytest.fixture
def make_scenario():
    """Factory for canonical scenarios with the PU target at a capacity fraction."""

    def build(
        gains: tuple[float, ...],
        budgets: tuple[float, ...],
        pu_snr: float = 100.0,
        fraction: float = 0.8,
    ) -> CanonicalScenario:
        return CanonicalScenario(
            pu_snr=pu_snr,
            interference_gains=gains,
            budgets=budgets,
            pu_rate_target=fraction * float(np.log2(1.0 + pu_snr)),
        )

    return build
