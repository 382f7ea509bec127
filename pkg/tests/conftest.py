import pytest

from evstation import EconomicParams, StationParams
from evstation.config import bundled_config_path, load_config


@pytest.fixture(scope="session")
def table1():
    scenarios, run = load_config(bundled_config_path("table1"))
    return scenarios, run


@pytest.fixture
def econ_default():
    return EconomicParams(beta=0.05, phi=100.0, u_phi=100.0, p_e=0.06, c=0.4)


@pytest.fixture
def station_default():
    return StationParams(m=4, alpha=11.5, parking_capacity=40, lam=0.3, tau=1.01)
