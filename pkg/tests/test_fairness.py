import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairmatch.graph import ColoredBipartiteGraph, FairnessSpec, Matching
from fairmatch.fairness import (
    check_delta_fair,
    color_mass,
    concentration_bound,
    empirical_concentration,
    failure_bound_one_sided,
    failure_bound_two_sided,
    is_balanced,
    satisfies_beta,
)


def _disjoint(colors, ell=None):
    g = ColoredBipartiteGraph.from_tuples(
        len(colors), len(colors), [(i, i, 1.0, c) for i, c in enumerate(colors)], ell)
    return g, Matching.from_edges(g, range(len(colors)))


def _mass_graph(masses):
    """One unit-x edge per unit of mass, color c gets masses[c] disjoint edges."""
    colors = [c for c, k in enumerate(masses) for _ in range(k)]
    g, _ = _disjoint(colors, len(masses))
    return g, np.ones(len(colors))


def test_balanced_pass():
    _, m = _disjoint([0, 0, 1, 1])
    r = check_delta_fair(m, FairnessSpec(0.5, 0.5))
    assert r.passed and r.violation_lower == 1.0 and r.violation_upper == 1.0
    assert sum(c.share for c in r.per_color) == pytest.approx(1.0)


def test_unbalanced_fail():
    _, m = _disjoint([0, 0, 0, 1])
    r = check_delta_fair(m, FairnessSpec(0.5, 0.5))
    assert r.passed is False
    assert r.violation_upper == pytest.approx(1.5)
    assert r.violation_lower == pytest.approx(2.0)


def test_delta_one_lower_side_trivial():
    _, m = _disjoint([0, 0, 0, 1])
    r = check_delta_fair(m, FairnessSpec(0.5, 0.5), delta=1.0)
    assert all(c.lower == 0.0 for c in r.per_color)
    assert r.passed  # shares 0.75, 0.25 are <= 2 * beta


def test_missing_color_infinite_lower_violation():
    _, m = _disjoint([0, 0], ell=2)
    r = check_delta_fair(m, FairnessSpec(0.4, 0.6))
    assert r.violation_lower == math.inf
    assert json.loads(json.dumps(r.to_dict()))["violation_lower"] == "inf"


def test_empty_matching_degenerate():
    g, _ = _disjoint([0, 1])
    r = check_delta_fair(Matching.empty(g), FairnessSpec(0.5, 0.5))
    assert r.degenerate and r.passed is None and r.matching_size == 0
    assert not is_balanced(Matching.empty(g), FairnessSpec(0.5, 0.5))
    assert is_balanced(Matching.empty(g), FairnessSpec(0.0, 0.5))
    assert satisfies_beta(Matching.empty(g), 0.3)


def test_negative_delta_rejected():
    _, m = _disjoint([0, 1])
    with pytest.raises(ValueError):
        check_delta_fair(m, FairnessSpec(0.5, 0.5), -0.1)


def test_boundary_share_counts_as_within():
    # 0.9/3 * 10 is 3.0000000000000004 in floating point
    _, m = _disjoint([0] * 3 + [1] * 3 + [2] * 4)
    assert is_balanced(m, FairnessSpec(0.9 / 3 * 1, 1.2 / 3 * 1))


@settings(max_examples=50)
@given(counts=st.lists(st.integers(0, 6), min_size=2, max_size=4).filter(lambda c: sum(c) > 0),
       lo=st.floats(0, 0.5), hi=st.floats(0.5, 1), delta=st.floats(0, 1))
def test_per_color_spec_equals_global(counts, lo, hi, delta):
    colors = [c for c, k in enumerate(counts) for _ in range(k)]
    _, m = _disjoint(colors, len(counts))
    ell = len(counts)
    a = check_delta_fair(m, FairnessSpec(lo, hi), delta)
    b = check_delta_fair(m, FairnessSpec((lo,) * ell, (hi,) * ell), delta)
    assert a == b


def test_violation_factors_one_iff_within():
    for colors in ([0, 1], [0, 0, 1], [0, 1, 1, 1]):
        _, m = _disjoint(colors)
        r = check_delta_fair(m, FairnessSpec(0.4, 0.6))
        within = r.passed
        assert within == (r.violation_lower == 1.0 and r.violation_upper == 1.0)
        assert r.violation_lower >= 1.0 and r.violation_upper >= 1.0


def test_report_attaches_bounds():
    g, x = _mass_graph([3, 5])
    m = Matching.from_edges(g, range(8))
    r = check_delta_fair(m, FairnessSpec(0.3, 0.7), 0.5, g, x)
    assert r.failure_bound_two_sided == (1.0, 1.0)


def test_two_sided_bound_values():
    g, x = _mass_graph([0, 2800])
    f = failure_bound_two_sided(g, x, 0.5)
    assert f[0] == 1.0  # empty color is vacuous
    assert f[1] == pytest.approx(4 * math.exp(-25), rel=1e-12)
    assert f[1] == pytest.approx(5.56e-11, rel=1e-3)
    assert failure_bound_two_sided(g, x, 0.1)[1] == 1.0  # 4/e ~ 1.47 capped
    with pytest.raises(ValueError):
        failure_bound_two_sided(g, x, 0.0)


def test_one_sided_bound_values():
    assert failure_bound_one_sided(np.zeros(3), 0.5, 0.5) == 1.0
    assert failure_bound_one_sided(np.full(224, 1.0), 0.5, 0.5) == pytest.approx(2 * math.exp(-1))
    assert failure_bound_one_sided(np.full(224, 1.0), 0.5, 0.5) == pytest.approx(0.7358, abs=1e-4)
    assert failure_bound_one_sided(np.full(2240, 1.0), 0.5, 0.5) == pytest.approx(9.08e-5, rel=1e-3)
    with pytest.raises(ValueError):
        failure_bound_one_sided(np.ones(1), 0.5, 1.0)


def test_bounds_monotone():
    deltas = np.linspace(0.5, 2, 8)
    g, x = _mass_graph([300, 400])
    vals = [failure_bound_two_sided(g, x, d)[0] for d in deltas]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    per_color = failure_bound_two_sided(g, x, 1.0)
    assert per_color[0] > per_color[1]
    eps = np.linspace(0.3, 0.9, 7)
    xs = np.ones(2000)
    vals = [failure_bound_one_sided(xs, 0.5, e) for e in eps]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    vals = [failure_bound_one_sided(np.ones(k), 0.5, 0.5) for k in (300, 600, 900)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_color_mass(two_edge_shared):
    assert color_mass(two_edge_shared, [0.25, 0.5]).tolist() == [0.25, 0.5]


def test_concentration_single_edge(single_edge):
    # |M| is Bernoulli(1/2) and E = 1/2, so every outcome deviates by exactly 1/2
    est = empirical_concentration(single_edge, [1.0], delta=0.5, trials=500)
    assert est.expected.tolist() == [0.5]
    assert est.frequency[0] == 1.0
    est = empirical_concentration(single_edge, [1.0], delta=0.999, trials=500)
    assert est.frequency[0] == 1.0


def test_concentration_star(star):
    g, x = star
    est = empirical_concentration(g, x, colors=[0], delta=0.5, trials=500)
    assert est.bound[0] == 1.0
    assert 0.0 <= est.frequency[0] <= 1.0


def test_concentration_bound_formula():
    g, x = _mass_graph([300])
    assert concentration_bound(g, x, 0.5)[0] == pytest.approx(2 * math.exp(-75 / 28))
    assert concentration_bound(g, x, 0.5)[0] == pytest.approx(0.137, abs=1e-3)
