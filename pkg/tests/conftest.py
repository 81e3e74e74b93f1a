import pytest

from fairmatch.graph import ColoredBipartiteGraph, generate_star_fixture


@pytest.fixture
def two_edge_shared():
    # both edges meet at left vertex 0; colors 0 and 1, weights 3 and 1
    return ColoredBipartiteGraph.from_tuples(1, 2, [(0, 0, 3.0, 0), (0, 1, 1.0, 1)])


@pytest.fixture
def single_edge():
    return ColoredBipartiteGraph.from_tuples(1, 1, [(0, 0, 1.5, 0)])


@pytest.fixture
def path3():
    # path a-b-c-d as left {a, c}, right {b, d}: e1=(a,b) e2=(c,b) e3=(c,d), colors 1,2,1
    return ColoredBipartiteGraph.from_tuples(2, 2, [(0, 0, 1.0, 0), (1, 0, 1.0, 1), (1, 1, 1.0, 0)], 2)


@pytest.fixture
def star():
    return generate_star_fixture(10, 0.5)
