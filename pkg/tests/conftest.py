from pathlib import Path

import pytest

from pvdeflect.model import Scenario, SimulationConfig
from pvdeflect.runner import Simulation, worst

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def side_sim():
    return Simulation(SimulationConfig())


@pytest.fixture(scope="session")
def central_sim():
    return Simulation(SimulationConfig(scenario=Scenario(kind="central_linear")))


@pytest.fixture(scope="session")
def side_sweep(side_sim):
    return side_sim.sweep()


@pytest.fixture(scope="session")
def central_sweep(central_sim):
    return central_sim.sweep()


@pytest.fixture(scope="session")
def side_worst(side_sweep):
    return worst(side_sweep)
