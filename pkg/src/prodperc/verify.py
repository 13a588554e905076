"""Property suites behind ``prodperc verify``.

Each suite returns a :class:`SuiteResult`; failures carry the offending
inputs verbatim so they can be replayed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .analysis import tree_count_exact
from .base import complete, cycle, edge, is_connected, isoperimetric_exact
from .oracle import mc_agreement
from .percolation import PercolationSample, make_round_plan
from .product import ProductGraph, decompose_projections, parse_product, product_iso_bounds


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.checked} checked, {len(self.failures)} failed"


# -- projections ---------------------------------------------------------------

_POOL = [edge(), cycle(3), cycle(4), complete(4), cycle(5)]


def random_projection_instance(rng: random.Random, max_t: int = 10, max_n: int = 1 << 14):
    """A random product (t <= max_t, n <= max_n) and a random vertex set M, |M| <= t."""
    t = rng.randint(1, max_t)
    while True:
        factors = [rng.choice(_POOL) for _ in range(t)]
        if math.prod(f.order for f in factors) <= max_n:
            break
    G = ProductGraph(factors)
    m = rng.randint(1, min(t, G.n))
    chosen = rng.sample(range(G.n), m)
    return G, [G.index_to_coord(i) for i in chosen]


def check_projection_instance(G: ProductGraph, M) -> list[str]:
    """Every postcondition of the decomposition, by enumerating all vertices."""
    problems = []
    projs = decompose_projections(G, M)
    m = len(M)
    if len(projs) != m:
        return [f"expected {m} projections, got {len(projs)}"]
    coords = np.array(list(G.vertices()), dtype=np.int64).reshape(G.n, G.t)
    cover = np.zeros(G.n, dtype=np.int64)
    Marr = np.array(M, dtype=np.int64).reshape(m, G.t)
    for j, P in enumerate(projs):
        inside = np.ones(G.n, dtype=bool)
        in_M = np.ones(m, dtype=bool)
        for i, c in enumerate(P.choices):
            if c is not None:
                inside &= coords[:, i] == c
                in_M &= Marr[:, i] == c
        cover += inside
        if P.dimension < G.t - m + 1:
            problems.append(f"projection {P} has dimension {P.dimension} < {G.t - m + 1}")
        if int(inside.sum()) != math.prod(G.radices[i] for i in P.free_coordinates()):
            problems.append(f"projection {P} has the wrong vertex count")
        if in_M.sum() != 1 or not in_M[j]:
            problems.append(f"projection {P} holds M-vertices {np.flatnonzero(in_M).tolist()}, expected [{j}]")
    if cover.max() > 1:
        problems.append("projections overlap")
    return problems


def suite_projections(instances: int = 1000, seed: int = 0) -> SuiteResult:
    rng = random.Random(seed)
    res = SuiteResult("projections")
    for _ in range(instances):
        G, M = random_projection_instance(rng)
        problems = check_projection_instance(G, M)
        res.checked += 1
        if problems:
            res.failures.append(f"G={G!r} M={M}: {'; '.join(problems)}")
    return res


# -- isoperimetry -------------------------------------------------------------

ISO_PRODUCTS = ["edge^3", "complete3^2", "cycle4,edge", "edge^2", "complete3,edge", "edge^4", "cycle5,edge"]


def suite_iso(descriptors=ISO_PRODUCTS) -> SuiteResult:
    res = SuiteResult("iso")
    for desc in descriptors:
        G = parse_product(desc)
        lo, hi = product_iso_bounds(G)
        exact = isoperimetric_exact(G.materialize())
        res.checked += 1
        line = f"{desc}: i(G) = {exact.value} in [{lo}, {hi}] witness={exact.witness}"
        res.notes.append(line)
        if not lo <= exact.value <= hi:
            res.failures.append(line)
    return res


# -- oracle ----------------------------------------------------------------------


def suite_oracle(samples: int = 100_000, probabilities=(0.2, 0.5, 0.8)) -> SuiteResult:
    res = SuiteResult("oracle")
    for desc in ("complete3", "edge^2", "complete3,edge"):
        G = parse_product(desc)
        for p in probabilities:
            rep = mc_agreement(G, p, samples)
            res.checked += 1
            line = (
                f"{desc} p={p}: exact={rep['expected_L1_exact']:.6f} "
                f"mc={rep['expected_L1_mc']:.6f} z={rep['z']:+.3f}"
            )
            res.notes.append(line)
            if rep["verdict"] != "pass":
                res.failures.append(line)
    return res


# -- tree counting -----------------------------------------------------------------


def connected_graphs(n: int):
    """All connected labelled graphs on ``n`` vertices as adjacency lists."""
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        adj = [[] for _ in range(n)]
        for e, (u, v) in enumerate(pairs):
            if mask >> e & 1:
                adj[u].append(v)
                adj[v].append(u)
        if is_connected(adj):
            yield adj


def suite_treecount(max_vertices: int = 5) -> SuiteResult:
    res = SuiteResult("treecount")
    for n in range(1, max_vertices + 1):
        for adj in connected_graphs(n):
            for m in range(1, n + 1):
                count, bound = tree_count_exact(adj, m)
                res.checked += 1
                if count > bound:
                    res.failures.append(f"adjacency={adj} m={m}: t_m={count} > {bound}")
    count, bound = tree_count_exact(complete(3), 2)
    res.checked += 1
    res.notes.append(f"t_2(K_3) = {count} <= {bound:.2f}")
    if count != 3 or count > bound:
        res.failures.append(f"t_2(K_3) = {count}, bound {bound}")
    return res


# -- round splitting --------------------------------------------------------------


def marginal_open_fraction(sample: PercolationSample, keys: int, rounds=None) -> float:
    """Open fraction over the first ``keys`` edges of the product, in key order."""
    G = sample.graph
    opened = seen = 0
    for i in range(G.t):
        for e in G.factor_edges(i):
            take = min(G.n // G.radices[i], keys - seen)
            if take <= 0:
                return opened / seen
            opened += int(sample.open_mask(i, e, np.arange(take), rounds).sum())
            seen += take
    if seen < keys:
        raise ValueError(f"product has only {seen} edges, {keys} requested")
    return opened / seen


def suite_rounds(keys: int = 10**6, epsilon: float = 0.25, descriptor: str = "complete3^12", seed: int = 0) -> SuiteResult:
    res = SuiteResult("rounds")
    G = parse_product(descriptor)
    triple = make_round_plan(epsilon, G.d, "triple")
    single = make_round_plan(epsilon, G.d, "single")
    p = single.target_p
    gap = abs(triple.union_probability() - p)
    res.checked += 1
    res.notes.append(f"plan constraint |1 - prod(1 - p_i) - p| = {gap:.3e}")
    if gap > 1e-12:
        res.failures.append(f"plan constraint violated by {gap}")
    f_single = marginal_open_fraction(PercolationSample(G, single, seed), keys)
    f_triple = marginal_open_fraction(PercolationSample(G, triple, seed + 1), keys)
    sigma = math.sqrt(2 * p * (1 - p) / keys)
    z = (f_triple - f_single) / sigma
    res.checked += 1
    line = f"p={p:.6f} single={f_single:.6f} triple={f_triple:.6f} z={z:+.3f}"
    res.notes.append(line)
    if abs(z) > 4:
        res.failures.append(line)
    # nested rounds: G1 within G2 within G3 on a sample of keys
    sample = PercolationSample(G, triple, seed)
    ctx = np.arange(min(keys, G.n // G.radices[0]))
    g1 = sample.open_mask(0, (0, 1), ctx, ["p1"])
    g2 = sample.open_mask(0, (0, 1), ctx, ["p1", "p2"])
    g3 = sample.open_mask(0, (0, 1), ctx, ["p1", "p2", "p3"])
    res.checked += 1
    if (g1 & ~g2).any() or (g2 & ~g3).any():
        res.failures.append("round union is not monotone")
    return res


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "projections": suite_projections,
    "iso": suite_iso,
    "oracle": suite_oracle,
    "treecount": suite_treecount,
    "rounds": suite_rounds,
}


def run_suite(name: str) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn()
