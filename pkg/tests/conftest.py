import pytest

from wvatilt import PointKind, default_beam, default_crystal, locate_points


@pytest.fixture(scope="session")
def crystal():
    return default_crystal()


@pytest.fixture(scope="session")
def beam():
    return default_beam()


@pytest.fixture(scope="session")
def k_o(beam):
    return beam.vacuum_wavenumber


@pytest.fixture(scope="session")
def coherency_points(crystal, k_o):
    """The 11 coherency points of the default plate below 1.0 rad."""
    return locate_points(crystal, k_o, (0.0, 1.0), PointKind.COHERENCY)


@pytest.fixture(scope="session")
def anti_points(crystal, k_o):
    return locate_points(crystal, k_o, (0.0, 1.0), PointKind.ANTI)
