"""Seeded bond percolation on implicit product graphs.

Every edge is decided by hashing ``(seed, round, coordinate, factor edge,
context)``, so a sample is a pure function of its inputs and edges may be
queried in any order: BFS, full scans and single lookups all agree.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .mixer import fold, fold_array, hash_words, hash_words_array, to_unit, to_unit_array
from .product import EdgeKey, ProductGraph

EXACT_BUDGET = 1 << 26
DEFAULT_K = 2
REFERENCE_K = 16
Z99 = 2.5758293035489004
_CHUNK = 1 << 22
_VISITED_ARRAY_LIMIT = 1 << 26
_START_TAG = 0x5354415254
_TRIAL_TAG = 0x545249414C


class PercolationError(ValueError):
    pass


@dataclass(frozen=True)
class RoundPlan:
    """Independent exposure rounds whose union retains each edge with ``target_p``."""

    rounds: tuple[tuple[float, str], ...]
    target_p: float

    def __post_init__(self):
        if not self.rounds:
            raise PercolationError("a round plan needs at least one round")
        labels = [lab for _, lab in self.rounds]
        if len(set(labels)) != len(labels):
            raise PercolationError(f"duplicate round labels {labels}")
        for p, lab in self.rounds:
            if not 0.0 <= p <= 1.0:
                raise PercolationError(f"round {lab!r} probability {p} outside [0, 1]")
        union = self.union_probability()
        if abs(union - self.target_p) > 1e-12:
            raise PercolationError(f"rounds give {union!r}, target is {self.target_p!r}")

    @classmethod
    def single(cls, p: float) -> "RoundPlan":
        return cls(((p, "p"),), p)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for _, lab in self.rounds)

    def positions(self, rounds: Iterable[str] | None = None) -> list[int]:
        if rounds is None:
            return list(range(len(self.rounds)))
        if isinstance(rounds, str):
            rounds = [rounds]
        labels = self.labels
        out = set()
        for lab in rounds:
            if lab not in labels:
                raise PercolationError(f"unknown round label {lab!r}; plan has {list(labels)}")
            out.add(labels.index(lab))
        return sorted(out)

    def union_probability(self, rounds: Iterable[str] | None = None) -> float:
        keep = 1.0
        for i in self.positions(rounds):
            keep *= 1.0 - self.rounds[i][0]
        return 1.0 - keep


def make_round_plan(
    epsilon: float, d: int, mode: str = "single", regime: str = "supercritical"
) -> RoundPlan:
    """Plan for ``p = (1 + eps)/d``, or ``(1 - eps)/d`` when subcritical.

    ``mode="triple"`` splits p into rounds ``p1``, ``p2 = eps/(2d)`` and
    ``p3 = 1/d^2`` with ``(1-p1)(1-p2)(1-p3) = 1-p``.
    """
    if epsilon <= 0:
        raise PercolationError(f"epsilon must be positive, got {epsilon}")
    if d < 2:
        raise PercolationError(f"degree must be at least 2, got {d}")
    if regime == "supercritical":
        p = (1 + epsilon) / d
    elif regime == "subcritical":
        p = (1 - epsilon) / d
    else:
        raise PercolationError(f"unknown regime {regime!r}")
    if not 0 <= p <= 1:
        raise PercolationError(f"p = {p} is not a probability")
    if mode == "single":
        return RoundPlan.single(p)
    if mode != "triple":
        raise PercolationError(f"unknown plan mode {mode!r}")
    p2 = epsilon / (2 * d)
    p3 = 1 / d**2
    p1 = 1 - (1 - p) / ((1 - p2) * (1 - p3))
    if p1 < 0:
        raise PercolationError(f"p = {p} too small to split into three rounds")
    return RoundPlan(((p1, "p1"), (p2, "p2"), (p3, "p3")), p)


@lru_cache(maxsize=1 << 14)
def _prefix(seed: int, round_pos: int, coordinate: int, a: int, b: int) -> int:
    return hash_words(seed, round_pos, coordinate, a, b)


@dataclass(frozen=True)
class PercolationSample:
    graph: ProductGraph
    plan: RoundPlan
    seed: int

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise PercolationError(f"seed {self.seed} is not a 64-bit unsigned integer")

    @classmethod
    def at(cls, graph: ProductGraph, p: float, seed: int) -> "PercolationSample":
        return cls(graph, RoundPlan.single(p), seed)

    @property
    def p(self) -> float:
        return self.plan.target_p

    def edge_open(self, key: EdgeKey, rounds: Iterable[str] | None = None) -> bool:
        """Whether ``key`` is retained in the union of the selected rounds."""
        a, b = key.factor_edge
        for pos in self.plan.positions(rounds):
            h = fold(_prefix(self.seed, pos, key.coordinate, a, b), key.context)
            if to_unit(h) < self.plan.rounds[pos][0]:
                return True
        return False

    def open_mask(
        self,
        coordinate: int,
        factor_edge: tuple[int, int],
        contexts: np.ndarray,
        rounds: Iterable[str] | None = None,
    ) -> np.ndarray:
        """Vectorised :meth:`edge_open` over many contexts of one factor edge."""
        a, b = factor_edge
        contexts = np.asarray(contexts, dtype=np.uint64)
        out = np.zeros(contexts.shape, dtype=bool)
        for pos in self.plan.positions(rounds):
            p = self.plan.rounds[pos][0]
            if p <= 0.0:
                continue
            h = fold_array(_prefix(self.seed, pos, coordinate, a, b), contexts)
            out |= to_unit_array(h) < p
        return out

    def open_keys_array(self, coordinate, lo, hi, contexts, rounds: Iterable[str] | None = None) -> np.ndarray:
        """Vectorised :meth:`edge_open` where every key component may vary."""
        out = np.zeros(np.shape(contexts), dtype=bool)
        for pos in self.plan.positions(rounds):
            p = self.plan.rounds[pos][0]
            if p <= 0.0:
                continue
            h = hash_words_array(self.seed, pos, coordinate, lo, hi, contexts)
            out |= to_unit_array(h) < p
        return out

    def open_neighbors(self, index: int, rounds: Iterable[str] | None = None) -> list[int]:
        G = self.graph
        out = []
        for i, a, b, j in G.neighbor_indices(index):
            if self.edge_open(G.edge_key_indices(i, a, b, index), rounds):
                out.append(j)
        return out


# -- exploration -------------------------------------------------------------


class _NeighborTables:
    """Per-coordinate arrays for expanding a whole BFS frontier at once."""

    def __init__(self, G: ProductGraph):
        self.cols = []
        for i, f in enumerate(G.factors):
            nbr = np.array(f.adjacency, dtype=np.int64)  # regular, so rectangular
            for j in range(f.degree):
                self.cols.append((i, G.strides[i], G.radices[i], nbr[:, j]))


@lru_cache(maxsize=64)
def _tables(G: ProductGraph) -> _NeighborTables:
    return _NeighborTables(G)


def _expand(sample: PercolationSample, frontier: np.ndarray, rounds) -> np.ndarray:
    """Open-edge neighbours of ``frontier`` in BFS discovery order
    (parent-major, then coordinate, then factor adjacency order)."""
    cols = _tables(sample.graph).cols
    width = len(cols)
    nbrs = np.empty((frontier.size, width), dtype=np.int64)
    is_open = np.empty((frontier.size, width), dtype=bool)
    for c, (i, s, r, nbr) in enumerate(cols):
        a = (frontier // s) % r
        b = nbr[a]
        ctx = (frontier // (s * r)) * s + frontier % s
        is_open[:, c] = sample.open_keys_array(i, np.minimum(a, b), np.maximum(a, b), ctx, rounds)
        nbrs[:, c] = frontier + (b - a) * s
    return nbrs[is_open]


class _Visited:
    def __init__(self, n: int):
        self.array = np.zeros(n, dtype=bool) if n <= _VISITED_ARRAY_LIMIT else None
        self.set: set[int] = set()

    def filter_new(self, cand: np.ndarray) -> np.ndarray:
        if self.array is not None:
            return cand[~self.array[cand]]
        return np.array([c for c in cand.tolist() if c not in self.set], dtype=np.int64)

    def add(self, items: np.ndarray) -> None:
        if self.array is not None:
            self.array[items] = True
        else:
            self.set.update(items.tolist())


def _first_occurrences(a: np.ndarray) -> np.ndarray:
    _, idx = np.unique(a, return_index=True)
    return a[np.sort(idx)]


def explore_component(
    sample: PercolationSample,
    v: int | Sequence[int],
    cap: int | None = None,
    rounds: Iterable[str] | None = None,
) -> tuple[frozenset[int], bool]:
    """BFS over open edges from ``v``.

    Returns the vertex indices found and a flag that is true when the
    exploration stopped because ``cap`` vertices had been discovered (the set
    then holds exactly the first ``cap`` vertices in BFS order).
    """
    G = sample.graph
    start = v if isinstance(v, (int, np.integer)) else G.coord_to_index(v)
    start = int(start)
    if not 0 <= start < G.n:
        raise PercolationError(f"vertex index {start} out of range")
    if cap is not None and cap < 1:
        raise PercolationError("cap must be at least 1")
    rounds = None if rounds is None else tuple(rounds)
    order = [np.array([start], dtype=np.int64)]
    total = 1
    if cap is not None and total >= cap:
        return frozenset([start]), True
    visited = _Visited(G.n)
    visited.add(order[0])
    frontier = order[0]
    while frontier.size:
        new = visited.filter_new(_first_occurrences(_expand(sample, frontier, rounds)))
        if cap is not None and total + new.size >= cap:
            order.append(new[: cap - total])
            return frozenset(np.concatenate(order).tolist()), True
        visited.add(new)
        order.append(new)
        total += new.size
        frontier = new
    return frozenset(np.concatenate(order).tolist()), False


# -- census -----------------------------------------------------------------


@dataclass
class ComponentCensus:
    mode: str
    n: int
    d: int
    p: float
    seed: int
    threshold: int
    L1: int
    L2: int
    W_count: int | None
    W_fraction: float
    histogram: dict[int, int]
    k: float | None = None
    W_radius: float | None = None
    sample_size: int | None = None
    confidence: float | None = None
    labels: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def lower_bounds_only(self) -> bool:
        return self.mode == "sampled"

    def components_at_least(self, size: float) -> int:
        """Number of components with at least ``size`` vertices."""
        return sum(c for s, c in self.histogram.items() if s >= size)

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "n": self.n,
            "d": self.d,
            "p": self.p,
            "seed": self.seed,
            "threshold": self.threshold,
            "k": self.k,
            "L1": self.L1,
            "L2": self.L2,
        }
        if self.mode == "exact":
            out["W_count"] = self.W_count
            out["W_fraction"] = self.W_fraction
        else:
            out["W_fraction"] = self.W_fraction
            out["W_radius"] = self.W_radius
            out["sample_size"] = self.sample_size
            out["confidence"] = self.confidence
            out["lower_bounds_only"] = True
        out["histogram"] = {str(s): c for s, c in sorted(self.histogram.items())}
        return out


def open_edge_list(sample: PercolationSample, rounds: Iterable[str] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """All open edges of the sample as endpoint index arrays ``(u, w)``."""
    G = sample.graph
    rounds = None if rounds is None else tuple(rounds)
    us, ws = [], []
    for i in range(G.t):
        s, r = G.strides[i], G.radices[i]
        total = G.n // r
        for a, b in G.factor_edges(i):
            for lo in range(0, total, _CHUNK):
                ctx = np.arange(lo, min(lo + _CHUNK, total), dtype=np.int64)
                ctx = ctx[sample.open_mask(i, (a, b), ctx, rounds)]
                u = (ctx // s) * (s * r) + ctx % s + a * s
                us.append(u)
                ws.append(u + (b - a) * s)
    if not us:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(us), np.concatenate(ws)


def component_labels(sample: PercolationSample, rounds: Iterable[str] | None = None) -> np.ndarray:
    n = sample.graph.n
    u, w = open_edge_list(sample, rounds)
    adj = coo_matrix((np.ones(u.size, dtype=np.int8), (u, w)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    return labels


def _threshold(G: ProductGraph, threshold: int | None, k: float | None) -> tuple[int, float | None]:
    if threshold is not None:
        return int(threshold), k
    k = DEFAULT_K if k is None else k
    return math.ceil(G.d**k), k


def census(
    sample: PercolationSample,
    threshold: int | None = None,
    mode: str = "exact",
    budget: int | None = None,
    k: float | None = None,
    rounds: Iterable[str] | None = None,
) -> ComponentCensus:
    """Component statistics of a sample.

    ``threshold`` defaults to ``d**k`` (``k`` defaults to 2).  In exact mode
    ``budget`` caps the vertex count (default 2**26); in sampled mode it is the
    number of random start vertices explored with ``cap=threshold``.
    """
    G = sample.graph
    threshold, k = _threshold(G, threshold, k)
    if mode == "exact":
        limit = EXACT_BUDGET if budget is None else budget
        if G.n > limit:
            raise PercolationError(
                f"n = {G.n} exceeds the exact-census budget {limit}; use mode='sampled'"
            )
        labels = component_labels(sample, rounds)
        sizes = np.bincount(labels)
        top = np.sort(sizes)[::-1]
        L1 = int(top[0])
        L2 = int(top[1]) if top.size > 1 else 0
        W = int(sizes[sizes >= threshold].sum())
        hist = {int(s): int(c) for s, c in zip(*np.unique(sizes, return_counts=True))}
        return ComponentCensus(
            "exact", G.n, G.d, sample.p, sample.seed, threshold, L1, L2, W, W / G.n, hist, k,
            labels=labels,
        )
    if mode != "sampled":
        raise PercolationError(f"unknown census mode {mode!r}")
    budget = 1000 if budget is None else budget
    if budget < 1:
        raise PercolationError("sampled census needs a positive budget")
    rng = np.random.default_rng(hash_words(sample.seed, _START_TAG))
    starts = rng.integers(0, G.n, size=budget)
    hits = 0
    complete: dict[int, int] = {}  # min vertex -> size for fully explored components
    biggest = 0
    for v in starts.tolist():
        verts, truncated = explore_component(sample, v, cap=threshold, rounds=rounds)
        biggest = max(biggest, len(verts))
        if truncated:
            hits += 1
        else:
            complete[min(verts)] = len(verts)
    f = hits / budget
    sizes_seen = sorted(complete.values(), reverse=True)
    if hits:
        L1, L2 = biggest, (sizes_seen[0] if sizes_seen else 0)
    else:
        L1 = sizes_seen[0]
        L2 = sizes_seen[1] if len(sizes_seen) > 1 else 0
    return ComponentCensus(
        "sampled", G.n, G.d, sample.p, sample.seed, threshold, L1, L2, None, f,
        dict(Counter(complete.values())), k,
        W_radius=Z99 * math.sqrt(f * (1 - f) / budget), sample_size=budget, confidence=0.99,
    )


# -- distance-2 density -------------------------------------------------------


def ball2(G: ProductGraph, v: int) -> list[int]:
    """Vertices within G-distance 2 of ``v`` (v first, then distance 1, then 2)."""
    seen = {v}
    out = [v]
    ring1 = []
    for *_, j in G.neighbor_indices(v):
        if j not in seen:
            seen.add(j)
            ring1.append(j)
    out.extend(ring1)
    for u in ring1:
        for *_, j in G.neighbor_indices(u):
            if j not in seen:
                seen.add(j)
                out.append(j)
    return out


def distance2_density(
    sample: PercolationSample,
    threshold: int | None = None,
    trials: int = 200,
    census_result: ComponentCensus | None = None,
    k: float | None = None,
    rounds: Iterable[str] | None = None,
) -> float:
    """Fraction of random vertices with some vertex at G-distance <= 2 lying in
    a component of at least ``threshold`` vertices.

    Uses ``census_result.labels`` when an exact census is supplied, otherwise
    explores with ``cap=threshold`` (memoising what each exploration learns).
    """
    G = sample.graph
    threshold, _ = _threshold(G, threshold, k)
    rng = np.random.default_rng(hash_words(sample.seed, _TRIAL_TAG))
    picks = rng.integers(0, G.n, size=trials).tolist()
    if census_result is not None and census_result.labels is not None:
        big = np.bincount(census_result.labels)[census_result.labels] >= threshold
        return sum(bool(big[ball2(G, v)].any()) for v in picks) / trials

    known: dict[int, bool] = {}

    def is_big(u: int) -> bool:
        if u not in known:
            verts, truncated = explore_component(sample, u, cap=threshold, rounds=rounds)
            for x in verts:
                known[x] = truncated
        return known[u]

    return sum(any(is_big(u) for u in ball2(G, v)) for v in picks) / trials


def largest_component_sizes(
    graph: ProductGraph, plan: RoundPlan, seeds: Sequence[int], rounds: Iterable[str] | None = None
) -> np.ndarray:
    """``census(...).L1`` for many seeds of a small product at once.

    Open-edge patterns are hashed for all seeds together; each distinct
    pattern is then labelled once.
    """
    keys = list(graph.edge_keys())
    if len(keys) > 62:
        raise PercolationError("seed-vectorised L1 is limited to products with <= 62 edges")
    coord = np.array([k.coordinate for k in keys], dtype=np.int64)
    lo = np.array([k.factor_edge[0] for k in keys], dtype=np.int64)
    hi = np.array([k.factor_edge[1] for k in keys], dtype=np.int64)
    ctx = np.array([k.context for k in keys], dtype=np.int64)
    ends = np.array([graph.endpoints(k) for k in keys], dtype=np.int64).reshape(-1, 2)
    seed_col = np.asarray(seeds, dtype=np.uint64).reshape(-1, 1)
    is_open = np.zeros((seed_col.shape[0], len(keys)), dtype=bool)
    for pos in plan.positions(rounds):
        p = plan.rounds[pos][0]
        if p > 0.0:
            h = hash_words_array(seed_col, pos, coord, lo, hi, ctx)
            is_open |= to_unit_array(h) < p
    weights = np.left_shift(np.uint64(1), np.arange(len(keys), dtype=np.uint64))
    patterns = (is_open.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    uniq, inverse = np.unique(patterns, return_inverse=True)
    l1 = np.empty(uniq.size, dtype=np.int64)
    n = graph.n
    for j, pat in enumerate(uniq.tolist()):
        sel = [(pat >> e) & 1 == 1 for e in range(len(keys))]
        u, w = ends[sel, 0], ends[sel, 1]
        adj = coo_matrix((np.ones(u.size, dtype=np.int8), (u, w)), shape=(n, n))
        _, labels = connected_components(adj, directed=False)
        l1[j] = np.bincount(labels).max()
    return l1[inverse.ravel()]
