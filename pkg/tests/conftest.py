import numpy as np
import pytest

from nlgames.games import Graph, chsh_game, coloring_game, load_graph, nps_game


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def chsh():
    return chsh_game()


@pytest.fixture(scope="session")
def nps3():
    return nps_game(3)


@pytest.fixture(scope="session")
def k3():
    return coloring_game(Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)]), 3)


@pytest.fixture(scope="session")
def k4():
    return coloring_game(Graph.from_edges(4, [(u, v) for u in range(4) for v in range(u + 1, 4)]), 4)


@pytest.fixture(scope="session")
def c5():
    return coloring_game(Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)]), 2)


@pytest.fixture(scope="session")
def g14():
    return coloring_game(load_graph("g14"), 4)


@pytest.fixture(scope="session")
def g14_strategy():
    from nlgames.io import load_builtin_strategy

    return load_builtin_strategy("g14")
