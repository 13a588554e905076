from __future__ import annotations


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size.

    >>> uf = UnionFind(4)
    >>> uf.union(0, 1) and uf.union(2, 3)
    True
    >>> uf.find(1) == uf.find(0), uf.find(1) == uf.find(2)
    (True, False)
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.components -= 1
        return True

    def component_sizes(self) -> list[int]:
        return [self.size[r] for r in range(len(self.parent)) if self.find(r) == r]
