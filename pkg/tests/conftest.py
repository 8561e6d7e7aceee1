import numpy as np
import pytest

from mtreduce.lattice import LatticeSpec, build_adjacency
from mtreduce.simulation import default_coupling_table


@pytest.fixture(scope="session")
def table():
    return default_coupling_table()


@pytest.fixture(scope="session")
def spec50():
    return LatticeSpec(length=50)


@pytest.fixture(scope="session")
def adjacency50(spec50):
    return build_adjacency(spec50)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
