"""Small regular base graphs and their exact isoperimetric constants."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

DEFAULT_C_MAX = 16
ISO_EXACT_LIMIT = 24

_PRESET = re.compile(r"^\s*(edge|cycle|complete)\s*(\d+)?\s*$")


class GraphError(ValueError):
    """A base graph (or graph descriptor) violates a structural requirement."""


@dataclass(frozen=True)
class BaseGraph:
    name: str
    order: int
    adjacency: tuple[tuple[int, ...], ...]
    degree: int

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (u, v) with u < v, sorted."""
        return [(u, v) for u in range(self.order) for v in self.adjacency[u] if u < v]

    @property
    def num_edges(self) -> int:
        return self.order * self.degree // 2

    def relabel(self, perm: Sequence[int]) -> "BaseGraph":
        """Return the graph with vertex ``u`` renamed to ``perm[u]``."""
        adj: list[list[int]] = [[] for _ in range(self.order)]
        for u in range(self.order):
            adj[perm[u]] = [perm[v] for v in self.adjacency[u]]
        return from_adjacency(adj, name=f"{self.name}~", c_max=None)


def _check_structure(adj: Sequence[Sequence[int]]) -> None:
    n = len(adj)
    for u, nbrs in enumerate(adj):
        if len(set(nbrs)) != len(nbrs):
            raise GraphError(f"vertex {u} lists a neighbour twice (multigraph)")
        for v in nbrs:
            if not 0 <= v < n:
                raise GraphError(f"vertex {u} has out-of-range neighbour {v}")
            if v == u:
                raise GraphError(f"self-loop at vertex {u}")
            if u not in adj[v]:
                raise GraphError(f"asymmetric adjacency: {u} lists {v} but {v} does not list {u}")


def is_connected(adj: Sequence[Sequence[int]]) -> bool:
    n = len(adj)
    if n == 0:
        return False
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == n


def from_adjacency(
    adj: Sequence[Sequence[int]],
    name: str = "custom",
    c_max: int | None = DEFAULT_C_MAX,
    degree: int | None = None,
) -> BaseGraph:
    """Validate an adjacency list and freeze it into a :class:`BaseGraph`.

    ``c_max=None`` disables the order limit (used for materialized products).
    ``degree``, if given, must match the common vertex degree.
    """
    adj = [list(nbrs) for nbrs in adj]
    n = len(adj)
    if n < 2:
        raise GraphError(f"order {n} < 2: base graphs must be non-trivial")
    if c_max is not None and n > c_max:
        raise GraphError(f"order {n} exceeds the configured limit C_max={c_max}")
    _check_structure(adj)
    degrees = {len(nbrs) for nbrs in adj}
    if len(degrees) != 1:
        raise GraphError(f"irregular graph: vertex degrees {sorted(degrees)}")
    (deg,) = degrees
    if degree is not None and deg != degree:
        raise GraphError(f"declared degree {degree} but vertices have degree {deg}")
    if not is_connected(adj):
        raise GraphError("disconnected graph")
    return BaseGraph(name, n, tuple(tuple(sorted(nbrs)) for nbrs in adj), deg)


def edge() -> BaseGraph:
    return from_adjacency([[1], [0]], name="edge")


def cycle(k: int, c_max: int | None = DEFAULT_C_MAX) -> BaseGraph:
    if k < 3:
        raise GraphError(f"cycle needs k >= 3, got {k}")
    return from_adjacency(
        [[(u - 1) % k, (u + 1) % k] for u in range(k)], name=f"cycle{k}", c_max=c_max
    )


def complete(k: int, c_max: int | None = DEFAULT_C_MAX) -> BaseGraph:
    if k < 2:
        raise GraphError(f"complete needs k >= 2, got {k}")
    return from_adjacency(
        [[v for v in range(k) if v != u] for u in range(k)], name=f"complete{k}", c_max=c_max
    )


def parse_adjacency_text(text: str, name: str = "custom", c_max: int | None = DEFAULT_C_MAX) -> BaseGraph:
    """Parse the ``order degree`` header followed by one neighbour line per vertex."""
    lines = [ln.strip() for ln in text.strip().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphError("empty adjacency text")
    try:
        order, degree = (int(x) for x in lines[0].split())
    except ValueError:
        raise GraphError(f"bad header line {lines[0]!r}; expected 'order degree'") from None
    body = lines[1:]
    if len(body) != order:
        raise GraphError(f"header declares {order} vertices but {len(body)} neighbour lines follow")
    try:
        adj = [[int(x) for x in ln.split()] for ln in body]
    except ValueError as exc:
        raise GraphError(f"non-integer neighbour index: {exc}") from None
    return from_adjacency(adj, name=name, c_max=c_max, degree=degree)


def parse_base_graph(spec: str, c_max: int | None = DEFAULT_C_MAX) -> BaseGraph:
    """Build a base graph from a preset (``edge``, ``cycle k``, ``complete k``)
    or from an adjacency-list text block.

    >>> parse_base_graph("cycle 4").degree
    2
    """
    m = _PRESET.match(spec)
    if m is None:
        if "\n" in spec.strip() or spec.strip()[:1].isdigit():
            return parse_adjacency_text(spec, c_max=c_max)
        raise GraphError(f"unknown base graph {spec.strip()!r}; expected edge | cycle <k> | complete <k>")
    kind, arg = m.group(1), m.group(2)
    if kind == "edge":
        if arg is not None:
            raise GraphError("'edge' takes no parameter")
        return edge()
    if arg is None:
        raise GraphError(f"'{kind}' needs a size parameter")
    k = int(arg)
    return cycle(k, c_max) if kind == "cycle" else complete(k, c_max)


@dataclass(frozen=True)
class IsoResult:
    value: Fraction
    witness: tuple[int, ...]


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint32)
    count = np.zeros(x.shape, dtype=np.int64)
    while x.any():
        count += (x & 1).astype(np.int64)
        x >>= 1
    return count


def isoperimetric_exact(H: BaseGraph, chunk: int = 1 << 20) -> IsoResult:
    """Exact edge isoperimetric (Cheeger) constant by exhaustive subset search.

    Minimises ``e(S, S^c) / |S|`` over non-empty ``S`` with ``|S| <= order/2``.
    Among minimisers the witness is the first in (size, lexicographic) order.
    """
    n = H.order
    if n > ISO_EXACT_LIMIT:
        raise GraphError(f"order {n} too large for exact mode (limit {ISO_EXACT_LIMIT})")
    edges = np.array(H.edges(), dtype=np.uint32).reshape(-1, 2)
    half = n // 2
    best: Fraction | None = None
    candidates: list[int] = []
    for lo in range(1, 1 << n, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.uint32)
        size = _popcount(masks)
        keep = size <= half
        masks, size = masks[keep], size[keep]
        if masks.size == 0:
            continue
        cut = np.zeros(masks.shape, dtype=np.int64)
        for u, v in edges:
            cut += (((masks >> u) ^ (masks >> v)) & 1).astype(np.int64)
        # integer cross-multiplication picks the exact minimum ratio
        order_ = np.lexsort((size, cut / size))
        i0 = order_[0]
        local = Fraction(int(cut[i0]), int(size[i0]))
        ties = cut * local.denominator == size * local.numerator
        if best is None or local < best:
            best, candidates = local, [int(m) for m in masks[ties]]
        elif local == best:
            candidates.extend(int(m) for m in masks[ties])
    assert best is not None
    subsets = [tuple(u for u in range(n) if (m >> u) & 1) for m in candidates]
    witness = min(subsets, key=lambda s: (len(s), s))
    return IsoResult(best, witness)


def boundary_edges(H: BaseGraph, subset: Sequence[int]) -> int:
    s = set(subset)
    return sum(1 for u in s for v in H.adjacency[u] if v not in s)
