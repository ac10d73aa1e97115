"""Static baselines: CSR and a load-once sorted adjacency list.

These set the read-performance and memory floor the dynamic structures
are compared against.  Both are immutable after build and freely
shareable across threads.
"""

from __future__ import annotations

import numpy as np

from .versioning import WORD_BYTES


def _edge_weight_fallback(u: int, v: int) -> int:
    # deterministic, seed-free, strictly positive
    return ((u ^ v) % 255) + 1


class Csr:
    """Offsets + packed neighbor array; neighbors sorted within a vertex."""

    sorted_scan = True

    def __init__(self, offsets, neighbors, weights=None):
        self.offsets = offsets
        self.neighbors = neighbors
        self.weights = weights

    def num_vertices(self) -> int:
        return len(self.offsets) - 1

    def num_edges(self) -> int:
        return int(self.offsets[-1])

    def scan_vertices(self) -> range:
        return range(self.num_vertices())

    def scan_neighbors(self, u: int) -> list[int]:
        if not 0 <= u < self.num_vertices():
            return []
        lo, hi = int(self.offsets[u]), int(self.offsets[u + 1])
        return self.neighbors[lo:hi].tolist()

    def degree(self, u: int) -> int:
        if not 0 <= u < self.num_vertices():
            return 0
        return int(self.offsets[u + 1] - self.offsets[u])

    def search_edge(self, u: int, v: int) -> bool:
        if not 0 <= u < self.num_vertices():
            return False
        lo, hi = int(self.offsets[u]), int(self.offsets[u + 1])
        i = lo + int(np.searchsorted(self.neighbors[lo:hi], v))
        return i < hi and int(self.neighbors[i]) == v

    def weight(self, u: int, v: int, default=None):
        if self.weights is None:
            return _edge_weight_fallback(u, v) if default is None else default
        lo, hi = int(self.offsets[u]), int(self.offsets[u + 1])
        i = lo + int(np.searchsorted(self.neighbors[lo:hi], v))
        if i < hi and int(self.neighbors[i]) == v:
            return int(self.weights[i])
        return default

    def memory_words(self) -> int:
        words = len(self.offsets) + len(self.neighbors)
        if self.weights is not None:
            words += len(self.weights)
        return words

    def memory_bytes(self) -> int:
        return self.memory_words() * WORD_BYTES

    def check_invariants(self) -> None:
        assert int(self.offsets[0]) == 0
        assert (np.diff(self.offsets) >= 0).all()
        assert int(self.offsets[-1]) == len(self.neighbors)
        for u in range(self.num_vertices()):
            lo, hi = int(self.offsets[u]), int(self.offsets[u + 1])
            seg = self.neighbors[lo:hi]
            assert (np.diff(seg) > 0).all(), f"vertex {u} neighbors not strictly sorted"


def csr_build(edges, num_vertices: int | None = None) -> Csr:
    """edges: iterable of (u, v) or (u, v, w).  Duplicates collapse to one
    stored edge; for weighted duplicates the last weight wins."""
    dedup: dict[tuple[int, int], int | None] = {}
    max_id = -1
    any_weight = False
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else None
        if w is not None:
            any_weight = True
        dedup[(u, v)] = w
        if u > max_id:
            max_id = u
        if v > max_id:
            max_id = v
    n = (max_id + 1) if num_vertices is None else num_vertices
    m = len(dedup)
    offsets = np.zeros(n + 1, dtype=np.int64)
    neighbors = np.empty(m, dtype=np.int64)
    weights = np.empty(m, dtype=np.int64) if any_weight else None
    for (u, _v) in dedup:
        offsets[u + 1] += 1
    np.cumsum(offsets, out=offsets)
    cursor = offsets[:-1].copy()
    for (u, v) in sorted(dedup):
        i = cursor[u]
        neighbors[i] = v
        if weights is not None:
            w = dedup[(u, v)]
            weights[i] = w if w is not None else _edge_weight_fallback(u, v)
        cursor[u] += 1
    return Csr(offsets, neighbors, weights)


class StaticAdjList:
    """Per-vertex sorted arrays, built by binary-search insertion."""

    sorted_scan = True

    def __init__(self, num_vertices: int):
        self._adj: list[list[int]] = [[] for _ in range(num_vertices)]
        self._weights: dict[tuple[int, int], int] = {}
        self._ecount = 0

    @classmethod
    def build(cls, edges, num_vertices: int | None = None) -> "StaticAdjList":
        rows = [(e[0], e[1], e[2] if len(e) > 2 else None) for e in edges]
        if num_vertices is None:
            num_vertices = max((max(u, v) for u, v, _w in rows), default=-1) + 1
        out = cls(num_vertices)
        for u, v, w in rows:
            out._insert(u, v, w)
        return out

    def _insert(self, u: int, v: int, w: int | None) -> None:
        row = self._adj[u]
        lo, hi = 0, len(row)
        while lo < hi:
            mid = (lo + hi) >> 1
            if row[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        if lo >= len(row) or row[lo] != v:
            row.insert(lo, v)
            self._ecount += 1
        if w is not None:
            self._weights[(u, v)] = w

    def num_vertices(self) -> int:
        return len(self._adj)

    def num_edges(self) -> int:
        return self._ecount

    def scan_vertices(self) -> range:
        return range(len(self._adj))

    def scan_neighbors(self, u: int) -> list[int]:
        if not 0 <= u < len(self._adj):
            return []
        return list(self._adj[u])

    def degree(self, u: int) -> int:
        if not 0 <= u < len(self._adj):
            return 0
        return len(self._adj[u])

    def search_edge(self, u: int, v: int) -> bool:
        if not 0 <= u < len(self._adj):
            return False
        row = self._adj[u]
        lo, hi = 0, len(row)
        while lo < hi:
            mid = (lo + hi) >> 1
            if row[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(row) and row[lo] == v

    def weight(self, u: int, v: int, default=None):
        w = self._weights.get((u, v))
        if w is not None:
            return w
        return _edge_weight_fallback(u, v) if default is None else default

    def memory_words(self) -> int:
        return len(self._adj) + self._ecount

    def memory_bytes(self) -> int:
        return self.memory_words() * WORD_BYTES
