# modules/union_find.py
from typing import Dict, Hashable, Iterable, List


class UnionFind:
    """Disjoint sets whose representative is always the least member."""

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        for x in items:
            self.add(x)

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x

    def find(self, x):
        self.add(x)
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        # least member wins so classes print the same on every run
        if y < x:
            x, y = y, x
        self.parent[y] = x

    def reps(self) -> List[Hashable]:
        return sorted(x for x in self.parent if self.find(x) == x)

    def classes(self) -> Dict[Hashable, List[Hashable]]:
        out: Dict[Hashable, List[Hashable]] = {rep: [] for rep in self.reps()}
        for x in sorted(self.parent):
            out[self.find(x)].append(x)
        return out

    def __len__(self):
        return len(self.reps())

    def __iter__(self):
        return iter(self.reps())
