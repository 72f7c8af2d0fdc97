"""
Shared test fixtures
Packaged manifests and their Jacobi structures
"""

import pytest

from jlie.manifest import load_manifest
from jlie.scalar import Chart


@pytest.fixture
def plane():
    return Chart("plane", ("x", "y"))


@pytest.fixture
def space():
    return Chart("space", ("x", "y", "z"))


@pytest.fixture(scope="session")
def heisenberg():
    return load_manifest("heisenberg.json")


@pytest.fixture(scope="session")
def sl2():
    return load_manifest("sl2.json")


@pytest.fixture(scope="session")
def riccati_r1():
    return load_manifest("riccati_r1.json")


@pytest.fixture(scope="session")
def riccati_r4():
    return load_manifest("riccati_r4.json")


@pytest.fixture(scope="session")
def rectified():
    return load_manifest("rectified.json")


@pytest.fixture(scope="session")
def heisenberg_structure(heisenberg):
    return heisenberg.structure(seed=0)


@pytest.fixture(scope="session")
def sl2_structure(sl2):
    return sl2.structure(seed=0)
