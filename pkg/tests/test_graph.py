import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairmatch.graph import (
    ColoredBipartiteGraph,
    FairnessSpec,
    GraphFormatError,
    Matching,
    NotBipartiteError,
    generate_erdos_renyi,
    generate_star_fixture,
    read_graph,
    read_matching,
    sample_gnp,
    validate,
    write_graph,
    write_matching,
)


def test_validate_empty_graph_ok():
    assert validate(ColoredBipartiteGraph(0, 0, ())) == []
    assert validate(ColoredBipartiteGraph(3, 2, (), 2)) == []


def test_validate_zero_weight():
    g = ColoredBipartiteGraph.from_tuples(1, 1, [(0, 0, 0.0, 0)])
    problems = validate(g)
    assert len(problems) == 1 and "nonpositive weight" in problems[0]


def test_validate_duplicate_edge():
    g = ColoredBipartiteGraph.from_tuples(1, 1, [(0, 0, 1.0, 0), (0, 0, 1.0, 1)])
    assert any("duplicate edge" in p for p in validate(g))


def test_validate_reports_everything():
    g = ColoredBipartiteGraph.from_tuples(1, 1, [(2, 0, -1.0, 0), (0, 5, float("nan"), 7)], 2)
    problems = validate(g)
    assert any("dangling left" in p for p in problems)
    assert any("dangling right" in p for p in problems)
    assert any("nonpositive" in p for p in problems)
    assert any("non-finite" in p for p in problems)
    assert any("bad color" in p for p in problems)


def test_fairness_spec_checks():
    with pytest.raises(ValueError):
        FairnessSpec(0.6, 0.5)
    with pytest.raises(ValueError):
        FairnessSpec(0.1, 0.5, epsilon=1.0)
    with pytest.raises(ValueError):
        FairnessSpec((0.1, 0.2), 0.5)
    spec = FairnessSpec((0.1, 0.2), (0.5, 0.6))
    with pytest.raises(ValueError):
        spec.bounds(3)
    a, b = FairnessSpec(0.2, 0.7).bounds(3)
    assert list(a) == [0.2] * 3 and list(b) == [0.7] * 3


def test_matching_rejects_shared_vertex(two_edge_shared):
    with pytest.raises(ValueError):
        Matching.from_edges(two_edge_shared, [0, 1])
    m = Matching.from_edges(two_edge_shared, [0])
    assert m.per_color_count == (1, 0) and m.total_weight == 3.0


def test_er_p_zero_has_no_edges():
    g = generate_erdos_renyi(4, 0.0, 2, seed=3)
    assert g.num_edges == 0
    assert g.n_u + g.n_v == 4


def test_er_p_one_is_complete_bipartite():
    # first seed whose fair-coin split is 2/2
    seed = next(s for s in range(100) if generate_erdos_renyi(4, 0.0, 1, seed=s).n_u == 2)
    g = generate_erdos_renyi(4, 1.0, 1, seed=seed)
    assert (g.n_u, g.n_v) == (2, 2)
    assert g.num_edges == 4
    assert all(e.color == 0 for e in g.edges)


def test_er_sparse_density_example():
    g = generate_erdos_renyi(50, 10 / 50, 2, (1.0, 2.0), True, seed=7)
    assert validate(g) == []
    expected = 0.2 * g.n_u * g.n_v
    sd = np.sqrt(g.n_u * g.n_v * 0.2 * 0.8)
    assert abs(g.num_edges - expected) <= 4 * sd
    w = g.weights
    assert w.min() >= 1.0 and w.max() < 2.0
    assert set(g.colors.tolist()) <= {0, 1}


def test_er_bipartite_subgraph_of_gnp():
    # the split instance keeps exactly the crossing pairs of the same G(n, p)
    pairs, w, c, side = sample_gnp(30, 0.3, 3, seed=11)
    crossing = sum(side[i] != side[j] for i, j in pairs)
    g = generate_erdos_renyi(30, 0.3, 3, seed=11)
    assert g.num_edges == crossing
    assert sorted(e.weight for e in g.edges) == sorted(
        wt for (i, j), wt in zip(pairs, w) if side[i] != side[j])


def test_er_non_bipartite_rejected():
    with pytest.raises(NotBipartiteError):
        generate_erdos_renyi(30, 0.5, 2, bipartite_split=False, seed=0)
    # a sparse enough G(n, p) can be bipartite and is then accepted
    g = generate_erdos_renyi(6, 0.05, 2, bipartite_split=False, seed=1)
    assert validate(g) == []


@pytest.mark.parametrize("args", [(1, 0.5, 2), (5, 1.5, 2), (5, 0.5, 0)])
def test_er_bad_args(args):
    with pytest.raises(ValueError):
        generate_erdos_renyi(*args)
    with pytest.raises(ValueError):
        generate_erdos_renyi(5, 0.5, 2, weight_range=(2.0, 1.0))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 25), p=st.floats(0, 1), ell=st.integers(1, 4), seed=st.integers(0, 2**32))
def test_er_deterministic_and_valid(n, p, ell, seed):
    a = generate_erdos_renyi(n, p, ell, seed=seed)
    b = generate_erdos_renyi(n, p, ell, seed=seed)
    assert a == b
    assert validate(a) == []
    assert a.n_u + a.n_v == n


def test_star_fixture_example():
    g, x = generate_star_fixture(10, 0.5)
    assert g.num_edges == 11
    assert x.sum() == pytest.approx(1.0)
    assert x[g.colors == 1].sum() == pytest.approx(0.5)
    assert validate(g) == []


def test_star_fixture_n1():
    g, x = generate_star_fixture(1, 0.5)
    assert g.num_edges == 2
    assert list(x) == [0.5, 0.5]


@given(n=st.integers(1, 60), eps=st.floats(0.01, 0.99))
def test_star_fixture_loads(n, eps):
    g, x = generate_star_fixture(n, eps)
    assert sum(x[i] for i in g.incident_u(0)) <= 1 + 1e-12
    for v in range(g.n_v):
        assert sum(x[i] for i in g.incident_v(v)) <= 1


def test_text_roundtrip(tmp_path):
    g = generate_erdos_renyi(20, 0.3, 3, (1.0, 2.0), True, seed=5)
    path = tmp_path / "g.txt"
    write_graph(g, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "fairmatch-graph v1"
    assert lines[1] == f"{g.n_u} {g.n_v} {g.num_edges} 3"
    assert read_graph(path) == g  # 17 significant digits round-trip exactly


def test_json_roundtrip(tmp_path):
    g = generate_erdos_renyi(12, 0.4, 2, seed=2)
    path = tmp_path / "g.json"
    write_graph(g, path)
    data = json.loads(path.read_text())
    assert data["nU"] == g.n_u and data["ell"] == 2
    assert min(e[3] for e in data["edges"]) >= 1
    assert read_graph(path) == g


def test_read_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("nope\n")
    with pytest.raises(GraphFormatError):
        read_graph(p)
    p.write_text("fairmatch-graph v1\n1 1 2 1\n0 0 1.0 1\n")
    with pytest.raises(GraphFormatError):
        read_graph(p)
    p.write_text("fairmatch-graph v1\n1 1 1 1\n0 0 -1.0 1\n")
    with pytest.raises(GraphFormatError):
        read_graph(p)


def test_matching_file_roundtrip(tmp_path, path3):
    m = Matching.from_edges(path3, [0, 2])
    p = tmp_path / "m.txt"
    write_matching(path3, m, p)
    assert p.read_text() == "0 0\n1 1\n"
    assert read_matching(path3, p) == m
    p.write_text("0 1\n")
    with pytest.raises(GraphFormatError):
        read_matching(path3, p)
