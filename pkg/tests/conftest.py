import numpy as np
import pytest

from nehari import (
    SolverConfig,
    WeightedGraph,
    path_graph,
    power_nonlinearity,
    random_connected_graph,
    single_vertex_graph,
)


@pytest.fixture
def p3():
    return path_graph(3)


@pytest.fixture
def single():
    return single_vertex_graph()


@pytest.fixture
def two_vertex():
    return path_graph(2)


@pytest.fixture
def quartic():
    return power_nonlinearity(4.0)


@pytest.fixture
def random_graphs():
    return [random_connected_graph(n, seed=seed) for n, seed in [(8, 0), (12, 1), (20, 2)]]


@pytest.fixture
def focusing_cfg():
    return SolverConfig(kappa=1, lam=0.0)
