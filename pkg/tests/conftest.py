import numpy as np
import pytest

from graphcf import Graph, VertexUniverse


def random_graph(rng: np.random.Generator, universe: VertexUniverse,
                 density: float = 0.3) -> Graph:
    return Graph.from_mask(universe, rng.random(universe.n_pairs) < density)


def graph_with_edge_count(rng: np.random.Generator, universe: VertexUniverse,
                          count: int) -> Graph:
    mask = np.zeros(universe.n_pairs, dtype=bool)
    mask[rng.choice(universe.n_pairs, size=count, replace=False)] = True
    return Graph.from_mask(universe, mask)


@pytest.fixture
def uni6():
    return VertexUniverse.anonymous(6)


@pytest.fixture
def uni10():
    return VertexUniverse.anonymous(10)
