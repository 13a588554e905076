import math
from itertools import combinations

import pytest
from scipy.optimize import brentq

from prodperc.analysis import (
    AnalysisError,
    gw_survival_binomial,
    medium_component_bound,
    second_component_constant,
    solve_survival,
    spanning_tree_count,
    subcritical_bound,
    tree_count_exact,
)
from prodperc.base import complete, cycle, edge
from prodperc.product import ProductGraph
from prodperc.verify import connected_graphs

GRID = [round(0.05 * k, 2) for k in range(1, 21)]


def oracle_y(eps):
    return brentq(lambda y: 1 - math.exp(-(1 + eps) * y) - y, 1e-9, 1.0, xtol=1e-15, rtol=1e-15)


def brute_tree_count(adj, m):
    """Edge subsets of size m-1 that form a tree on exactly m vertices."""
    edges = sorted({(min(u, v), max(u, v)) for u, nb in enumerate(adj) for v in nb})
    if m == 1:
        return len(adj)
    count = 0
    for subset in combinations(edges, m - 1):
        verts = {x for e in subset for x in e}
        if len(verts) != m:
            continue
        parent = {v: v for v in verts}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        acyclic = True
        for u, v in subset:
            ru, rv = find(u), find(v)
            if ru == rv:
                acyclic = False
                break
            parent[ru] = rv
        count += acyclic
    return count


# -- survival ------------------------------------------------------------------


@pytest.mark.parametrize("eps", [0.01, 0.1, 0.25, 0.5, 1.0])
def test_survival_matches_brentq(eps):
    assert solve_survival(eps).y == pytest.approx(oracle_y(eps), abs=1e-11)


def test_survival_reference_values():
    assert solve_survival(1.0).y == pytest.approx(0.796812, abs=1e-6)
    assert solve_survival(0.25).y == pytest.approx(0.371370, abs=1e-6)


def test_survival_residual_and_monotonicity():
    ys = []
    for eps in GRID:
        sol = solve_survival(eps)
        assert sol.residual <= 1e-12
        assert 0 < sol.y < 1
        ys.append(sol.y)
    assert all(a < b for a, b in zip(ys, ys[1:]))


def test_survival_small_epsilon():
    ratios = [(2 * e - solve_survival(e).y) / e**2 for e in (0.04, 0.02, 0.01)]
    # the second-order coefficient is 8/3
    assert all(abs(r - 8 / 3) < 0.25 for r in ratios)
    assert solve_survival(0.01).y / 0.01 == pytest.approx(2, abs=0.03)


def test_survival_errors():
    with pytest.raises(AnalysisError):
        solve_survival(0.0)
    with pytest.raises(AnalysisError):
        solve_survival(-0.2)
    with pytest.raises(AnalysisError, match="tol"):
        solve_survival(0.5, tol=1e-16)


# -- branching process ------------------------------------------------------------


def test_gw_trivial_cases():
    assert gw_survival_binomial(10, 0.0) == 0.0
    assert gw_survival_binomial(1, 1.0) == 1.0
    assert gw_survival_binomial(5, 1.0) == 1.0
    assert gw_survival_binomial(10, 0.1) == 0.0


def test_gw_binary_tree():
    # Bin(2, p): extinction q = ((1-p)/p)^2
    p = 0.75
    assert gw_survival_binomial(2, p) == pytest.approx(1 - ((1 - p) / p) ** 2, abs=1e-12)


def test_gw_converges_to_poisson_limit():
    assert abs(gw_survival_binomial(1000, 1.25 / 1000) - solve_survival(0.25).y) < 2e-3
    for eps in (0.1, 0.25, 0.5):
        assert abs(gw_survival_binomial(10**4, (1 + eps) / 10**4) - solve_survival(eps).y) < 1e-3


def test_gw_errors():
    with pytest.raises(AnalysisError):
        gw_survival_binomial(0, 0.5)
    with pytest.raises(AnalysisError):
        gw_survival_binomial(3, 1.5)


# -- bounds ----------------------------------------------------------------------


def test_subcritical_bound():
    assert subcritical_bound(math.e**9, 1.0) == pytest.approx(81, rel=1e-15)
    assert subcritical_bound(65536, 0.4) == pytest.approx(623.83, abs=0.01)
    assert subcritical_bound(1000, 0.3) < subcritical_bound(1000, 0.2)
    assert subcritical_bound(1000, 0.3) < subcritical_bound(2000, 0.3)
    with pytest.raises(AnalysisError):
        subcritical_bound(1, 0.5)
    with pytest.raises(AnalysisError):
        subcritical_bound(100, 0.0)


def test_medium_component_bound():
    y = oracle_y(0.25)
    assert medium_component_bound(0.25, 1, 16) == pytest.approx(y / 5 * 2, rel=1e-12)
    assert medium_component_bound(0.25, 4, 24) == pytest.approx((y / 5) ** 4 * 24, rel=1e-12)
    assert medium_component_bound(0.25, 4, 24) == pytest.approx(7.30e-4, abs=5e-6)
    assert medium_component_bound(0.25, 2, 30) < medium_component_bound(0.25, 2, 40)
    with pytest.raises(AnalysisError):
        medium_component_bound(0.25, 0, 16)


def test_second_component_constant():
    assert second_component_constant(1.0, 2, 1.0) == 1600
    assert second_component_constant(0.25, 3, 1.2) == pytest.approx(8 * second_component_constant(0.5, 3, 1.2))
    G = ProductGraph([complete(3)] * 12)
    assert G.alpha == pytest.approx(24 / math.log(531441))
    assert second_component_constant(0.25, 3, G.alpha) == pytest.approx(279625.5, abs=0.1)
    with pytest.raises(AnalysisError):
        second_component_constant(0.0, 3, 1.0)


# -- tree counting -----------------------------------------------------------------


def test_spanning_trees_of_complete_graphs():
    for k in range(2, 7):
        assert spanning_tree_count(complete(k).adjacency, range(k)) == k ** (k - 2)


def test_tree_count_examples():
    assert tree_count_exact(complete(3), 2) == (3, pytest.approx(3 * 2 * math.e))
    assert tree_count_exact(cycle(5), 1) == (5, 5)
    count, bound = tree_count_exact(complete(3), 2)
    assert count == 3 and bound == pytest.approx(16.31, abs=0.01)


def test_tree_count_cube():
    Q3 = ProductGraph([edge()] * 3).materialize()
    count, bound = tree_count_exact(Q3, 3)
    assert count == brute_tree_count(Q3.adjacency, 3) == 24
    assert bound == pytest.approx(8 * (3 * math.e) ** 2) and count <= bound


def test_tree_count_matches_brute_force_on_small_graphs():
    for n in range(1, 6):
        for adj in connected_graphs(n):
            for m in range(1, n + 1):
                count, bound = tree_count_exact(adj, m)
                assert count == brute_tree_count(adj, m)
                assert count <= bound


def test_tree_count_errors():
    with pytest.raises(AnalysisError, match="budget"):
        tree_count_exact(cycle(11), 2)
    with pytest.raises(AnalysisError, match="m must"):
        tree_count_exact(cycle(4), 5)
