"""Brute-force ground truth for tiny graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

from .base import BaseGraph
from .percolation import PercolationSample, RoundPlan, largest_component_sizes
from .product import ProductGraph, describe
from .unionfind import UnionFind

MAX_EDGES = 20

GraphLike = Union[ProductGraph, BaseGraph, Sequence[Sequence[int]]]


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class ExactPercolationStats:
    graph_id: str
    p: float
    expected_L1: float
    L1_distribution: dict[int, float]
    connectivity_probability: float

    @property
    def variance_L1(self) -> float:
        second = sum(s * s * w for s, w in self.L1_distribution.items())
        return max(0.0, second - self.expected_L1**2)


def _edges_of(H: GraphLike) -> tuple[str, int, tuple[tuple[int, int], ...]]:
    if isinstance(H, ProductGraph):
        adj = [[j for *_, j in H.neighbor_indices(u)] for u in range(H.n)]
        name = describe(H.factors)
    elif isinstance(H, BaseGraph):
        adj, name = H.adjacency, H.name
    else:
        adj, name = H, "adjacency"
    edges = tuple(sorted({(min(u, v), max(u, v)) for u, nb in enumerate(adj) for v in nb if u != v}))
    return name, len(adj), edges


@lru_cache(maxsize=64)
def _l1_table(n: int, edges: tuple[tuple[int, int], ...]) -> dict[tuple[int, int], int]:
    """Count of edge subsets by (subset size, largest component)."""
    table: dict[tuple[int, int], int] = {}
    E = len(edges)
    for mask in range(1 << E):
        uf = UnionFind(n)
        for e in range(E):
            if mask >> e & 1:
                uf.union(*edges[e])
        key = (bin(mask).count("1"), max(uf.size[uf.find(v)] for v in range(n)))
        table[key] = table.get(key, 0) + 1
    return table


def exact_percolation_stats(H: GraphLike, p: float) -> ExactPercolationStats:
    """Exact distribution of the largest component of ``H_p`` by enumerating
    every edge subset with weight ``p^|S| (1-p)^(|E|-|S|)``."""
    if not 0 <= p <= 1:
        raise OracleError(f"p must be in [0, 1], got {p}")
    name, n, edges = _edges_of(H)
    E = len(edges)
    if E > MAX_EDGES:
        raise OracleError(f"{E} edges exceeds the enumeration limit of {MAX_EDGES}")
    dist: dict[int, float] = {}
    for (k, l1), count in _l1_table(n, edges).items():
        w = count * p**k * (1 - p) ** (E - k)
        if w:
            dist[l1] = dist.get(l1, 0.0) + w
    expected = sum(s * w for s, w in dist.items())
    return ExactPercolationStats(name, p, expected, dict(sorted(dist.items())), dist.get(n, 0.0))


def as_product(H: ProductGraph | BaseGraph) -> ProductGraph:
    return H if isinstance(H, ProductGraph) else ProductGraph([H])


def mc_agreement(H: ProductGraph | BaseGraph, p: float, samples: int = 100_000, seed_base: int = 0) -> dict:
    """Monte Carlo E[L1] from the percolation engine against the exact value."""
    G = as_product(H)
    exact = exact_percolation_stats(G, p)
    seeds = range(seed_base, seed_base + samples)
    l1 = largest_component_sizes(G, RoundPlan.single(p), seeds)
    mc = float(l1.mean())
    sigma = math.sqrt(exact.variance_L1 / samples)
    if sigma > 0:
        z = (mc - exact.expected_L1) / sigma
    else:
        z = 0.0 if math.isclose(mc, exact.expected_L1, abs_tol=1e-12) else math.inf
    return {
        "graph": exact.graph_id,
        "p": p,
        "samples": samples,
        "expected_L1_exact": exact.expected_L1,
        "expected_L1_mc": mc,
        "sigma": sigma,
        "z": z,
        "verdict": "pass" if abs(z) <= 4 else "fail",
    }


def reference_census(sample: PercolationSample) -> dict:
    """Component sizes via coordinate-level adjacency, scalar edge queries and
    a plain union-find; independent of the vectorised census path."""
    G = sample.graph
    uf = UnionFind(G.n)
    for v in G.vertices():
        vi = G.coord_to_index(v)
        for _, u in G.neighbors(v):
            if sample.edge_open(G.edge_key(v, u)):
                uf.union(vi, G.coord_to_index(u))
    sizes = sorted(uf.component_sizes(), reverse=True)
    hist: dict[int, int] = {}
    for s in sizes:
        hist[s] = hist.get(s, 0) + 1
    return {"L1": sizes[0], "L2": sizes[1] if len(sizes) > 1 else 0, "histogram": hist}
