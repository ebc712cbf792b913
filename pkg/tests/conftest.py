import pytest

from cartograph import make_system


@pytest.fixture(scope="session")
def pendulum():
    return make_system("spherical_pendulum")


@pytest.fixture(scope="session")
def toric():
    return make_system("toric_s2s2")


@pytest.fixture(scope="session")
def coupled_m():
    return make_system("coupled_m")


@pytest.fixture(scope="session")
def coupled_n():
    return make_system("coupled_n")
