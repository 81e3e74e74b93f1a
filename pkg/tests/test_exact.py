import pytest
from hypothesis import given, settings, strategies as st

from fairmatch.exact import (
    WorkLimitExceeded,
    brute_force_opt,
    brute_force_size_bound,
    matching_count_bound,
    solve_beta_fair,
    solve_exact_beta,
)
from fairmatch.fairness import check_delta_fair, is_balanced, satisfies_beta
from fairmatch.graph import ColoredBipartiteGraph, FairnessSpec, generate_erdos_renyi
from fairmatch.lp import solve_lp_fair

from oracles import small_er, subsets_oracle


@pytest.fixture
def two_disjoint():
    return ColoredBipartiteGraph.from_tuples(2, 2, [(0, 0, 1.0, 0), (1, 1, 1.0, 1)])


@pytest.mark.parametrize("args, expected", [
    ((1.0, 1.0, 100.0, 0.5, 0.0), 200),
    ((2.0, 1.0, 100.0, 0.5, 0.5), 1600),
    ((1.0, 1.0, 0.5 * 0.7, 0.5, 0.3), 1),
    ((1.5, 1.5, 0.9 * 0.9, 0.9, 0.1), 1),
])
def test_size_bound(args, expected):
    assert brute_force_size_bound(*args) == expected


def test_size_bound_rejects_bad_args():
    with pytest.raises(ValueError):
        brute_force_size_bound(1.0, 0.0, 100.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        brute_force_size_bound(1.0, 1.0, 100.0, 0.5, 1.0)


def test_path3_oracle_values(path3):
    # frozen from subsets_oracle
    assert subsets_oracle(path3, 0.5, 0.5) is None
    assert subsets_oracle(path3, 0.4, 0.6) is None
    assert subsets_oracle(path3, 0.0, 1.0) == 2.0


def test_path3_brute(path3):
    assert brute_force_opt(path3, FairnessSpec(0.5, 0.5)) is None
    assert brute_force_opt(path3, FairnessSpec(0.4, 0.6)) is None
    m = brute_force_opt(path3, FairnessSpec(0.0, 1.0))
    assert m.total_weight == 2.0 and m.size == 2


def test_single_edge_brute(single_edge):
    m = brute_force_opt(single_edge, FairnessSpec(0.0, 1.0))
    assert m.edges == (0,) and m.total_weight == 1.5


def test_alpha_zero_allows_empty(two_edge_shared):
    # every nonempty matching is a single edge with share 1 > 0.5
    m = brute_force_opt(two_edge_shared, FairnessSpec(0.0, 0.5))
    assert m is not None and m.size == 0


def test_size_cap_respected():
    g = generate_erdos_renyi(10, 0.6, 1, seed=2)
    m = brute_force_opt(g, FairnessSpec(0.0, 1.0), size_cap=2)
    assert m.size <= 2


def test_matching_count_bound():
    k22 = ColoredBipartiteGraph.from_tuples(2, 2, [(u, v, 1.0, 0) for u in range(2) for v in range(2)])
    # 7 actual matchings (1 empty, 4 singles, 2 perfect); degree product 3 * 3
    assert matching_count_bound(k22, 2) == 9
    assert matching_count_bound(k22, 1) == 5


def test_work_limit():
    g = generate_erdos_renyi(16, 0.6, 2, seed=2)
    with pytest.raises(WorkLimitExceeded):
        brute_force_opt(g, FairnessSpec(0.0, 1.0), work_limit=50)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), ab=st.sampled_from([(0.0, 1.0), (0.5, 0.5), (0.3, 0.7), (0.0, 0.6),
                                                            (0.2, 0.5)]),
       ell=st.integers(1, 3))
def test_brute_matches_subsets_oracle(seed, ab, ell):
    g = small_er(seed, n=7, p=0.5, ell=ell, max_edges=10)
    spec = FairnessSpec(*ab)
    got = brute_force_opt(g, spec)
    want = subsets_oracle(g, *ab)
    if want is None:
        assert got is None
    else:
        assert got.total_weight == pytest.approx(want, abs=1e-12)
        assert check_delta_fair(got, spec).passed in (True, None)
        assert is_balanced(got, spec)


@pytest.mark.parametrize("seed", range(20))
def test_brute_below_lp(seed):
    g = small_er(seed, max_edges=10)
    spec = FairnessSpec(0.3, 0.7)
    m = brute_force_opt(g, spec)
    if m is not None:
        assert m.total_weight <= solve_lp_fair(g, spec).objective_value + 1e-9


def test_exact_beta_two_disjoint(two_disjoint):
    res = solve_exact_beta(two_disjoint, 0.6, 0.1, max_attempts=20, seed=0)
    assert res.lp_objective == pytest.approx(2.0)
    # each attempt matches both edges with probability 1/4; 20 attempts all missing is 0.75^20
    assert res.satisfied_beta and res.matching.size == 2
    assert satisfies_beta(res.matching, 0.6)


def test_exact_beta_single_color_boundary(single_edge):
    res = solve_exact_beta(single_edge, 1 - 1e-9, 0.1)
    assert res.lp_mass == pytest.approx(0.0, abs=1e-9)
    assert res.matching.size == 0 and res.satisfied_beta


def test_exact_beta_empty_graph():
    g = ColoredBipartiteGraph(0, 0, (), 2)
    res = solve_exact_beta(g, 0.5, 0.2)
    assert res.matching.size == 0 and res.satisfied_beta


def test_exact_beta_rejects_bad_args(two_disjoint):
    with pytest.raises(ValueError):
        solve_exact_beta(two_disjoint, 1.0, 0.1)
    with pytest.raises(ValueError):
        solve_exact_beta(two_disjoint, 0.6, 0.0)


def test_satisfied_flag_recomputed():
    g = generate_erdos_renyi(30, 0.3, 2, seed=6)
    for seed in range(5):
        res = solve_exact_beta(g, 0.6, 0.3, max_attempts=3, seed=seed)
        assert res.satisfied_beta == satisfies_beta(res.matching, 0.6)


def test_exact_beta_deterministic():
    g = generate_erdos_renyi(30, 0.3, 3, seed=6)
    assert solve_exact_beta(g, 0.5, 0.2, seed=4) == solve_exact_beta(g, 0.5, 0.2, seed=4)


def test_dispatch_brute_on_small(two_disjoint):
    res = solve_beta_fair(two_disjoint, 0.6, 0.1)
    assert res.method == "brute" and res.matching.size == 2 and res.satisfied_beta


def test_dispatch_ocrs_on_large():
    g = generate_erdos_renyi(60, 0.2, 2, seed=1)
    res = solve_beta_fair(g, 0.6, 0.1, brute_threshold=1.0)
    assert res.method == "ocrs"


def test_dispatch_falls_back_on_work_limit():
    g = generate_erdos_renyi(30, 0.3, 2, seed=1)
    res = solve_beta_fair(g, 0.6, 0.1, work_limit=10)
    assert res.method == "ocrs"


def test_per_color_beta():
    g = generate_erdos_renyi(30, 0.3, 2, seed=3)
    res = solve_exact_beta(g, [0.7, 0.6], 0.1, max_attempts=5)
    assert res.satisfied_beta == satisfies_beta(res.matching, [0.7, 0.6])
