"""Implicit Cartesian products of base graphs.

Vertices are coordinate tuples, linearised in mixed radix with coordinate 0
most significant.  Adjacency is computed on demand and never stored.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import Iterator, Sequence

from .base import (
    DEFAULT_C_MAX,
    BaseGraph,
    GraphError,
    from_adjacency,
    isoperimetric_exact,
    parse_adjacency_text,
    parse_base_graph,
)

INDEX_LIMIT = 1 << 63

VertexCoord = tuple[int, ...]


@dataclass(frozen=True)
class EdgeKey:
    coordinate: int
    factor_edge: tuple[int, int]
    context: int


class ProductGraph:
    """``G = G(1) □ ... □ G(t)`` represented by its factor list."""

    def __init__(self, factors: Sequence[BaseGraph]):
        if not factors:
            raise GraphError("a product needs at least one factor")
        self.factors: tuple[BaseGraph, ...] = tuple(factors)
        self.t = len(self.factors)
        self.radices: tuple[int, ...] = tuple(f.order for f in self.factors)
        self.d = sum(f.degree for f in self.factors)
        n = math.prod(self.radices)
        if n >= INDEX_LIMIT:
            raise GraphError(f"product order {n} does not fit a 63-bit vertex index")
        self.n = n
        strides = [1] * self.t
        for i in range(self.t - 2, -1, -1):
            strides[i] = strides[i + 1] * self.radices[i + 1]
        self.strides: tuple[int, ...] = tuple(strides)
        self._factor_edges = tuple(tuple(f.edges()) for f in self.factors)
        self._edge_index = tuple({e: j for j, e in enumerate(es)} for es in self._factor_edges)

    @property
    def alpha(self) -> float:
        """The constant with ``d = alpha * ln(n)``."""
        return self.d / math.log(self.n)

    @property
    def num_edges(self) -> int:
        return self.n * self.d // 2

    @property
    def max_factor_order(self) -> int:
        return max(self.radices)

    def factor_edges(self, i: int) -> tuple[tuple[int, int], ...]:
        return self._factor_edges[i]

    def __repr__(self) -> str:
        return f"ProductGraph({describe(self.factors)!r}, t={self.t}, d={self.d}, n={self.n})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProductGraph) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    # -- codecs -----------------------------------------------------------

    def validate(self, v: Sequence[int]) -> None:
        if len(v) != self.t:
            raise GraphError(f"vertex has {len(v)} coordinates, product has t={self.t}")
        for i, (c, r) in enumerate(zip(v, self.radices)):
            if not 0 <= c < r:
                raise GraphError(f"coordinate {i} = {c} out of range [0, {r})")

    def coord_to_index(self, v: Sequence[int]) -> int:
        self.validate(v)
        return sum(c * s for c, s in zip(v, self.strides))

    def index_to_coord(self, index: int) -> VertexCoord:
        if not 0 <= index < self.n:
            raise GraphError(f"vertex index {index} out of range [0, {self.n})")
        out = []
        for r in reversed(self.radices):
            index, c = divmod(index, r)
            out.append(c)
        return tuple(reversed(out))

    def vertices(self) -> Iterator[VertexCoord]:
        return cartesian(*(range(r) for r in self.radices))

    # -- adjacency --------------------------------------------------------

    def neighbors(self, v: Sequence[int]) -> list[tuple[int, VertexCoord]]:
        """All ``d`` neighbours of ``v`` as ``(coordinate, vertex)`` pairs,
        ordered by coordinate then by neighbour index within the factor."""
        self.validate(v)
        v = tuple(v)
        out = []
        for i, f in enumerate(self.factors):
            for b in f.adjacency[v[i]]:
                out.append((i, v[:i] + (b,) + v[i + 1 :]))
        return out

    def neighbor_indices(self, index: int) -> list[tuple[int, int, int, int]]:
        """Neighbours of a vertex index as ``(coordinate, a, b, neighbour_index)``
        where ``a`` is the vertex's own coordinate and ``b`` the neighbour's."""
        coords = self.index_to_coord(index)
        out = []
        for i, a in enumerate(coords):
            s = self.strides[i]
            for b in self.factors[i].adjacency[a]:
                out.append((i, a, b, index + (b - a) * s))
        return out

    def context_of(self, index: int, i: int) -> int:
        """The vertex index with coordinate ``i`` deleted, in mixed radix."""
        s = self.strides[i]
        high, low = divmod(index, s * self.radices[i])
        return high * s + low % s

    def edge_key(self, u: Sequence[int], v: Sequence[int]) -> EdgeKey:
        self.validate(u)
        self.validate(v)
        diff = [i for i in range(self.t) if u[i] != v[i]]
        if len(diff) != 1:
            raise GraphError(f"{tuple(u)} and {tuple(v)} differ in {len(diff)} coordinates; not adjacent")
        (i,) = diff
        a, b = sorted((u[i], v[i]))
        if (a, b) not in self._edge_index[i]:
            raise GraphError(f"({a}, {b}) is not an edge of factor {i}; not adjacent")
        return EdgeKey(i, (a, b), self.context_of(self.coord_to_index(u), i))

    def edge_key_indices(self, i: int, a: int, b: int, index: int) -> EdgeKey:
        """Fast edge key from one endpoint index and the factor edge."""
        return EdgeKey(i, (a, b) if a < b else (b, a), self.context_of(index, i))

    def factor_edge_index(self, i: int, edge: tuple[int, int]) -> int:
        return self._edge_index[i][edge]

    def endpoints(self, key: EdgeKey) -> tuple[int, int]:
        """Vertex indices of the two endpoints of an edge key."""
        i = key.coordinate
        s, r = self.strides[i], self.radices[i]
        high, low = divmod(key.context, s)
        base = high * s * r + low
        a, b = key.factor_edge
        return base + a * s, base + b * s

    def edge_keys(self) -> Iterator[EdgeKey]:
        """Every edge exactly once."""
        for i in range(self.t):
            for e in self._factor_edges[i]:
                for ctx in range(self.n // self.radices[i]):
                    yield EdgeKey(i, e, ctx)

    def materialize(self) -> BaseGraph:
        """The product as an explicit graph (small products only)."""
        adj = [[j for _, _, _, j in self.neighbor_indices(u)] for u in range(self.n)]
        return from_adjacency(adj, name=describe(self.factors), c_max=None)


def assemble(factors: Sequence[BaseGraph]) -> ProductGraph:
    return ProductGraph(factors)


def describe(factors: Sequence[BaseGraph]) -> str:
    """Compact descriptor with repetition sugar, inverse of :func:`parse_product`."""
    parts: list[str] = []
    i = 0
    while i < len(factors):
        j = i
        while j < len(factors) and factors[j] == factors[i]:
            j += 1
        reps = j - i
        parts.append(factors[i].name if reps == 1 else f"{factors[i].name}^{reps}")
        i = j
    return ",".join(parts)


_TERM = re.compile(r"^\s*([a-z]+)\s*(\d*)\s*(?:\^\s*(\d+))?\s*$")


def parse_product(descriptor: str, c_max: int | None = DEFAULT_C_MAX) -> ProductGraph:
    """Parse ``edge^16``, ``complete3^12``, ``cycle5^4,edge^3`` and the like.

    A term ``file:<path>`` loads an adjacency-list file as one factor.
    """
    factors: list[BaseGraph] = []
    pos = 0
    for term in descriptor.split(","):
        where = f"at position {pos} ({term.strip()!r})"
        pos += len(term) + 1
        stripped = term.strip()
        if stripped.startswith("file:"):
            path, _, reps = stripped[5:].partition("^")
            try:
                with open(path) as fh:
                    g = parse_adjacency_text(fh.read(), name=stripped.split("^")[0], c_max=c_max)
            except (OSError, GraphError) as exc:
                raise GraphError(f"{where}: {exc}") from None
            factors.extend([g] * (int(reps) if reps else 1))
            continue
        m = _TERM.match(term)
        if m is None:
            raise GraphError(f"{where}: malformed factor term")
        kind, size, reps = m.groups()
        try:
            g = parse_base_graph(f"{kind} {size}" if size else kind, c_max=c_max)
        except GraphError as exc:
            raise GraphError(f"{where}: {exc}") from None
        count = int(reps) if reps else 1
        if count < 1:
            raise GraphError(f"{where}: repetition count must be >= 1")
        factors.extend([g] * count)
    return ProductGraph(factors)


# -- projections -----------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    """Per-coordinate choice: ``None`` keeps the full factor, an int fixes it."""

    choices: tuple[int | None, ...]

    @classmethod
    def full(cls, t: int) -> "Projection":
        return cls((None,) * t)

    @property
    def dimension(self) -> int:
        return sum(1 for c in self.choices if c is None)

    def free_coordinates(self) -> list[int]:
        return [i for i, c in enumerate(self.choices) if c is None]

    def fix(self, i: int, value: int) -> "Projection":
        ch = list(self.choices)
        ch[i] = value
        return Projection(tuple(ch))

    def validate(self, G: ProductGraph) -> None:
        if len(self.choices) != G.t:
            raise GraphError(f"projection has {len(self.choices)} entries, product has t={G.t}")
        for i, c in enumerate(self.choices):
            if c is not None and not 0 <= c < G.radices[i]:
                raise GraphError(f"fixed value {c} out of range for factor {i}")

    def contains(self, v: Sequence[int]) -> bool:
        return all(c is None or c == x for c, x in zip(self.choices, v))

    def vertices(self, G: ProductGraph) -> Iterator[VertexCoord]:
        ranges = [range(G.radices[i]) if c is None else (c,) for i, c in enumerate(self.choices)]
        return cartesian(*ranges)

    def __str__(self) -> str:
        return "(" + ",".join("*" if c is None else str(c) for c in self.choices) + ")"


def decompose_projections(G: ProductGraph, M: Sequence[Sequence[int]]) -> list[Projection]:
    """Cover ``M`` by pairwise disjoint projections of dimension at least
    ``t - |M| + 1``, each holding exactly one point of ``M``.

    The result is aligned with ``M``: entry ``j`` contains ``M[j]``.  The
    splitting coordinate is always the lowest free one on which two points of
    the current class disagree.
    """
    points = [tuple(v) for v in M]
    m = len(points)
    if m == 0:
        raise GraphError("M must be non-empty")
    if m > G.t:
        raise GraphError(f"|M| = {m} exceeds the dimension t = {G.t}")
    for v in points:
        G.validate(v)
    if len(set(points)) != m:
        raise GraphError("M contains repeated vertices")

    out: list[Projection | None] = [None] * m

    def split(members: list[int], proj: Projection) -> None:
        if len(members) == 1:
            out[members[0]] = proj
            return
        for i in proj.free_coordinates():
            values = {points[j][i] for j in members}
            if len(values) >= 2:
                break
        else:  # distinct points always disagree somewhere free
            raise AssertionError("no splitting coordinate")
        classes: dict[int, list[int]] = {}
        for j in members:
            classes.setdefault(points[j][i], []).append(j)
        for value in sorted(classes):
            split(classes[value], proj.fix(i, value))

    split(list(range(m)), Projection.full(G.t))
    return out  # type: ignore[return-value]


@dataclass(frozen=True)
class Restriction:
    """A projection viewed as a product in its own right, plus the embedding
    of its vertices back into the parent product."""

    graph: ProductGraph
    parent: ProductGraph
    projection: Projection

    def embed(self, v: Sequence[int]) -> VertexCoord:
        self.graph.validate(v)
        it = iter(v)
        return tuple(next(it) if c is None else c for c in self.projection.choices)

    def embed_index(self, index: int) -> int:
        return self.parent.coord_to_index(self.embed(self.graph.index_to_coord(index)))

    def lift(self, v: Sequence[int]) -> VertexCoord:
        """Inverse of :meth:`embed` for parent vertices inside the projection."""
        if not self.projection.contains(v):
            raise GraphError(f"{tuple(v)} is not in projection {self.projection}")
        return tuple(v[i] for i in self.projection.free_coordinates())


def restrict(G: ProductGraph, P: Projection) -> Restriction:
    P.validate(G)
    if P.dimension == 0:
        raise GraphError("projection of dimension 0 is a single vertex")
    sub = ProductGraph([G.factors[i] for i in P.free_coordinates()])
    return Restriction(sub, G, P)


def product_iso_bounds(G: ProductGraph) -> tuple[Fraction, Fraction]:
    """Lower and upper bounds ``(min_j i(G_j) / 2, min_j i(G_j))`` on i(G)."""
    cache: dict[BaseGraph, Fraction] = {}
    for f in G.factors:
        if f not in cache:
            cache[f] = isoperimetric_exact(f).value
    low = min(cache.values())
    return low / 2, low
