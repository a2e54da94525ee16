"""Trees of vertex-set clusters with separator-labelled edges.

One structure serves both the junction tree and the MPS tree: clusters have
stable integer ids and a boolean mark, edges carry a separator vertex set
(possibly empty), and a family map records which cluster hosts each
variable's family.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable

from .errors import InconsistencyError


class ClusterTree:
    def __init__(self):
        self._clusters: dict[int, frozenset[int]] = {}
        self._adj: dict[int, dict[int, frozenset[int]]] = {}
        self._marked: set[int] = set()
        self.family: dict[int, int] = {}
        self._next = 0

    # -- clusters ---------------------------------------------------------

    def add_cluster(self, vertices: Iterable[int], marked: bool = False) -> int:
        cid = self._next
        self._next += 1
        self._clusters[cid] = frozenset(vertices)
        self._adj[cid] = {}
        if marked:
            self._marked.add(cid)
        return cid

    def remove_cluster(self, cid: int) -> None:
        for nb in list(self._adj[cid]):
            del self._adj[nb][cid]
        del self._adj[cid]
        del self._clusters[cid]
        self._marked.discard(cid)

    def replace_cluster(self, cid: int, vertices: Iterable[int]) -> None:
        if cid not in self._clusters:
            raise KeyError(cid)
        self._clusters[cid] = frozenset(vertices)

    def cluster(self, cid: int) -> frozenset[int]:
        return self._clusters[cid]

    def cluster_ids(self) -> list[int]:
        return sorted(self._clusters)

    def clusters_containing(self, v: int) -> list[int]:
        return sorted(c for c, vs in self._clusters.items() if v in vs)

    def vertices(self) -> set[int]:
        out: set[int] = set()
        for vs in self._clusters.values():
            out |= vs
        return out

    def __contains__(self, cid: int) -> bool:
        return cid in self._clusters

    def __len__(self) -> int:
        return len(self._clusters)

    # -- edges ------------------------------------------------------------

    def add_edge(self, a: int, b: int, separator: Iterable[int]) -> None:
        if a == b:
            raise InconsistencyError("cannot connect a cluster to itself")
        if a not in self._clusters or b not in self._clusters:
            raise KeyError((a, b))
        if b in self._adj[a]:
            raise InconsistencyError(f"clusters {a} and {b} are already connected")
        sep = frozenset(separator)
        self._adj[a][b] = sep
        self._adj[b][a] = sep

    def remove_edge(self, a: int, b: int) -> None:
        del self._adj[a][b]
        del self._adj[b][a]

    def has_edge(self, a: int, b: int) -> bool:
        return b in self._adj.get(a, ())

    def separator(self, a: int, b: int) -> frozenset[int]:
        return self._adj[a][b]

    def set_separator(self, a: int, b: int, separator: Iterable[int]) -> None:
        if b not in self._adj[a]:
            raise KeyError((a, b))
        sep = frozenset(separator)
        self._adj[a][b] = sep
        self._adj[b][a] = sep

    def neighbors(self, cid: int) -> list[int]:
        return sorted(self._adj[cid])

    def edges(self) -> list[tuple[int, int, frozenset[int]]]:
        return sorted((a, b, sep) for a in self._adj for b, sep in self._adj[a].items() if a < b)

    def edge_count(self) -> int:
        return sum(len(ns) for ns in self._adj.values()) // 2

    # -- marks ------------------------------------------------------------

    def mark(self, cid: int) -> None:
        if cid not in self._clusters:
            raise KeyError(cid)
        self._marked.add(cid)

    def unmark(self, cid: int) -> None:
        self._marked.discard(cid)

    def is_marked(self, cid: int) -> bool:
        return cid in self._marked

    def marked_ids(self) -> list[int]:
        return sorted(self._marked)

    def clear_marks(self) -> None:
        self._marked.clear()

    # -- structure --------------------------------------------------------

    def path(self, a: int, b: int) -> list[int] | None:
        """Cluster ids along the unique path from a to b, inclusive."""
        if a == b:
            return [a]
        parent: dict[int, int] = {a: a}
        queue = [a]
        while queue:
            nxt: list[int] = []
            for c in queue:
                for nb in sorted(self._adj[c]):
                    if nb not in parent:
                        parent[nb] = c
                        if nb == b:
                            out = [b]
                            while out[-1] != a:
                                out.append(parent[out[-1]])
                            return out[::-1]
                        nxt.append(nb)
            queue = nxt
        return None

    def components(self) -> list[set[int]]:
        seen: set[int] = set()
        comps: list[set[int]] = []
        for start in self.cluster_ids():
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                c = stack.pop()
                for nb in self._adj[c]:
                    if nb not in comp:
                        comp.add(nb)
                        stack.append(nb)
            seen |= comp
            comps.append(comp)
        return comps

    def is_tree(self) -> bool:
        n = len(self._clusters)
        if n == 0:
            return True
        return self.edge_count() == n - 1 and len(self.components()) == 1

    def merge_into(self, src: int, dst: int) -> None:
        """Contract src into an adjacent (or disjoint) dst cluster.

        Edges incident to src move to dst with their separators; the family
        map is rehosted.  Vertex sets are left to the caller.
        """
        if src == dst:
            raise InconsistencyError("cannot merge a cluster into itself")
        for nb, sep in list(self._adj[src].items()):
            if nb == dst:
                continue
            if nb in self._adj[dst]:
                raise InconsistencyError(
                    f"merging {src} into {dst} would create a parallel edge via {nb}"
                )
            self._adj[dst][nb] = sep
            self._adj[nb][dst] = sep
            del self._adj[nb][src]
        self._adj[src] = {k: v for k, v in self._adj[src].items() if k == dst}
        for var, host in self.family.items():
            if host == src:
                self.family[var] = dst
        self.remove_cluster(src)

    # -- summaries --------------------------------------------------------

    def cluster_multiset(self) -> Counter:
        return Counter(self._clusters.values())

    def separator_multiset(self) -> Counter:
        return Counter(sep for _, _, sep in self.edges())

    def copy(self) -> "ClusterTree":
        t = ClusterTree()
        t._clusters = dict(self._clusters)
        t._adj = {c: dict(ns) for c, ns in self._adj.items()}
        t._marked = set(self._marked)
        t.family = dict(self.family)
        t._next = self._next
        return t

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = [f"{c}:{{{','.join(map(str, sorted(vs)))}}}" for c, vs in sorted(self._clusters.items())]
        return f"ClusterTree({'; '.join(parts)})"
