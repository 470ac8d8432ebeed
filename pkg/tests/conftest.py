import pytest

from moebiusband.band import build_triangular, build_wrinkle
from moebiusband.verify import prepare


@pytest.fixture(scope="session")
def tri_band():
    return build_triangular()


@pytest.fixture(scope="session")
def wrinkle4():
    return build_wrinkle(1e-4)


@pytest.fixture(scope="session")
def tri_state(tri_band):
    return prepare(tri_band)


@pytest.fixture(scope="session")
def wrinkle4_state(wrinkle4):
    return prepare(wrinkle4)
