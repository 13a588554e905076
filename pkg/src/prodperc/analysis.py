"""Survival probabilities and the explicit bounds used by the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .base import BaseGraph, is_connected


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class SurvivalSolution:
    epsilon: float
    y: float
    residual: float


def _survival_gap(y: float, epsilon: float) -> float:
    # 1 - exp(-(1+eps) y) - y, with expm1 for accuracy near y = 0
    return -math.expm1(-(1 + epsilon) * y) - y


def solve_survival(epsilon: float, tol: float = 1e-12) -> SurvivalSolution:
    """Root in (0, 1) of ``y = 1 - exp(-(1 + epsilon) y)`` by bisection."""
    if epsilon <= 0:
        raise AnalysisError(f"epsilon must be positive, got {epsilon}")
    if tol < 1e-14:
        raise AnalysisError(f"tol must be at least 1e-14, got {tol}")
    lo, hi = tol, 1.0
    if _survival_gap(lo, epsilon) <= 0:
        raise AnalysisError(f"epsilon = {epsilon} too small for the bracket [{tol}, 1]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _survival_gap(mid, epsilon) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    y = lo if abs(_survival_gap(lo, epsilon)) <= abs(_survival_gap(hi, epsilon)) else hi
    return SurvivalSolution(epsilon, y, abs(_survival_gap(y, epsilon)))


def gw_survival_binomial(d: int, p: float, tol: float = 1e-15, max_iter: int = 10**6) -> float:
    """Survival probability of a Galton-Watson tree with Bin(d, p) offspring.

    Iterates ``q <- (1 - p + p q)^d`` upward from 0 to the extinction
    probability and returns ``1 - q``.
    """
    if d < 1:
        raise AnalysisError(f"d must be >= 1, got {d}")
    if not 0 <= p <= 1:
        raise AnalysisError(f"p must be in [0, 1], got {p}")
    if p == 1:
        return 1.0
    if d * p <= 1:
        return 0.0
    q = 0.0
    for _ in range(max_iter):
        nxt = math.exp(d * math.log1p(-p * (1 - q)))
        if nxt - q < tol:
            q = nxt
            break
        q = nxt
    return 1.0 - q


def subcritical_bound(n: float, epsilon: float) -> float:
    """``9 ln(n) / eps^2``, the subcritical component-size bound."""
    if n < 2:
        raise AnalysisError(f"n must be >= 2, got {n}")
    if epsilon <= 0:
        raise AnalysisError(f"epsilon must be positive, got {epsilon}")
    return 9 * math.log(n) / epsilon**2


def medium_component_bound(epsilon: float, r: int, d: float) -> float:
    """``(y(eps)/5)^r * d^(r/4)``."""
    if r < 1 or int(r) != r:
        raise AnalysisError(f"r must be a positive integer, got {r}")
    if d < 2:
        raise AnalysisError(f"d must be >= 2, got {d}")
    y = solve_survival(epsilon).y
    return (y / 5) ** r * d ** (r / 4)


def second_component_constant(epsilon: float, C: float, alpha: float) -> float:
    """``800 C alpha / eps^3``."""
    if min(epsilon, C, alpha) <= 0:
        raise AnalysisError("epsilon, C and alpha must all be positive")
    return 800 * C * alpha / epsilon**3


# -- tree counting -----------------------------------------------------------


def _adjacency(H) -> list[list[int]]:
    if isinstance(H, BaseGraph):
        return [list(a) for a in H.adjacency]
    return [list(a) for a in H]


def _det(matrix: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in matrix]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


def spanning_tree_count(adj: Sequence[Sequence[int]], vertices: Sequence[int]) -> int:
    """Spanning trees of the subgraph induced on ``vertices`` (matrix-tree theorem)."""
    vs = list(vertices)
    if len(vs) == 1:
        return 1
    pos = {v: i for i, v in enumerate(vs)}
    k = len(vs)
    lap = [[Fraction(0)] * k for _ in range(k)]
    for v in vs:
        for u in adj[v]:
            if u in pos and u != v:
                lap[pos[v]][pos[v]] += 1
                lap[pos[v]][pos[u]] -= 1
    return int(_det([row[1:] for row in lap[1:]]))


def tree_count_exact(H, m: int, max_vertices: int = 10) -> tuple[int, float]:
    """Number of m-vertex trees (distinct edge sets) in ``H`` and the bound
    ``n (e D)^(m-1)`` with ``D`` the maximum degree.

    Two different spanning trees of the same vertex set are counted apart.
    """
    adj = _adjacency(H)
    n = len(adj)
    if n > max_vertices:
        raise AnalysisError(f"{n} vertices exceeds the enumeration budget of {max_vertices}")
    if not 1 <= m <= n:
        raise AnalysisError(f"m must be in [1, {n}], got {m}")
    count = 0
    for subset in combinations(range(n), m):
        chosen = set(subset)
        induced = [[u for u in adj[v] if u in chosen] for v in subset]
        relabel = {v: i for i, v in enumerate(subset)}
        if is_connected([[relabel[u] for u in nb] for nb in induced]):
            count += spanning_tree_count(adj, subset)
    max_deg = max((len(a) for a in adj), default=0)
    return count, n * (math.e * max_deg) ** (m - 1)
