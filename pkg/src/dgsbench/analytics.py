"""Analytics kernels over a uniform read view.

Each kernel is a pure single-threaded function of a view object exposing
`scan_vertices()`, `scan_neighbors(u)`, a `sorted_scan` flag, and (for
shortest paths) `weight(u, v)`.  The same kernel code runs against the
CSR baseline, a fine-mode read transaction, or a coarse-mode snapshot, so
results can be diffed across every storage design.

Triangle counting needs ascending neighbor scans for merge intersection
and refuses to run on the unsorted container family.
"""

from __future__ import annotations

import heapq
from collections import deque

from .errors import UnsupportedQueryError

UNREACHED = -1


def _edge_weight_fallback(u: int, v: int) -> int:
    return ((u ^ v) % 255) + 1


class DynamicView:
    """Adapts a graph read transaction (plus its owning graph, for the
    weight map and container kind) to the kernel view protocol."""

    def __init__(self, txn, graph):
        self._txn = txn
        self._graph = graph
        self.sorted_scan = graph.cfg.container != "unsorted"

    def scan_vertices(self):
        return self._txn.scan_vertices()

    def scan_neighbors(self, u: int):
        return self._txn.scan_neighbors(u)

    def degree(self, u: int) -> int:
        return self._txn.degree(u)

    def weight(self, u: int, v: int):
        return self._graph.weight(u, v, _edge_weight_fallback(u, v))


def _adjacency(view) -> tuple[list[int], dict[int, list[int]]]:
    verts = list(view.scan_vertices())
    return verts, {u: list(view.scan_neighbors(u)) for u in verts}


def pagerank(view, damping: float = 0.85, iters: int = 20) -> dict[int, float]:
    """Synchronous power iteration, fixed iteration count; dangling mass
    spread uniformly.  Ranks are normalized to sum to 1."""
    verts, adj = _adjacency(view)
    n = len(verts)
    if n == 0:
        return {}
    idx = {u: i for i, u in enumerate(verts)}
    ranks = [1.0 / n] * n
    for _ in range(iters):
        nxt = [0.0] * n
        dangling = 0.0
        for i, u in enumerate(verts):
            nbrs = adj[u]
            if nbrs:
                share = ranks[i] / len(nbrs)
                for v in nbrs:
                    nxt[idx[v]] += share
            else:
                dangling += ranks[i]
        base = (1.0 - damping) / n + damping * dangling / n
        ranks = [base + damping * x for x in nxt]
    total = sum(ranks)
    return {u: ranks[i] / total for u, i in idx.items()}


def bfs(view, source: int) -> dict[int, int]:
    """Hop distances from source; unreachable vertices get -1."""
    verts = list(view.scan_vertices())
    if source not in set(verts):
        raise ValueError(f"source vertex {source} not present")
    dist = {u: UNREACHED for u in verts}
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u]
        for v in view.scan_neighbors(u):
            if dist.get(v, 0) == UNREACHED:
                dist[v] = du + 1
                q.append(v)
    return dist


def sssp(view, source: int) -> dict[int, int]:
    """Dijkstra with a binary heap; weights must be nonnegative.
    Unreachable vertices get -1."""
    verts = list(view.scan_vertices())
    if source not in set(verts):
        raise ValueError(f"source vertex {source} not present")
    dist = {u: UNREACHED for u in verts}
    dist[source] = 0
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d != dist[u]:
            continue  # stale heap entry
        for v in view.scan_neighbors(u):
            w = view.weight(u, v)
            nd = d + w
            if dist.get(v, 0) == UNREACHED or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def wcc(view) -> dict[int, int]:
    """Min-label propagation until fixpoint; labels flow both ways along
    each scanned edge, so direction is ignored."""
    verts, adj = _adjacency(view)
    label = {u: u for u in verts}
    changed = True
    while changed:
        changed = False
        for u in verts:
            lu = label[u]
            for v in adj[u]:
                lv = label[v]
                if lv < lu:
                    lu = lv
            if lu < label[u]:
                label[u] = lu
                changed = True
            for v in adj[u]:
                if label[v] > lu:
                    label[v] = lu
                    changed = True
    return label


def triangle_count(view) -> int:
    """Counts u < v < w triangles by sorted-merge intersection; assumes an
    undirected (symmetrized) edge set."""
    if not getattr(view, "sorted_scan", False):
        raise UnsupportedQueryError(
            "triangle counting requires sorted neighbor scans; "
            "the unsorted container family cannot serve it"
        )
    verts, adj = _adjacency(view)
    count = 0
    for u in verts:
        nu = adj[u]
        for v in nu:
            if v <= u:
                continue
            nv = adj.get(v)
            if nv is None:
                continue
            # merge-intersect suffixes of N(u) and N(v) above v
            i = j = 0
            li, lj = nu, nv
            while i < len(li) and j < len(lj):
                a, b = li[i], lj[j]
                if a <= v:
                    i += 1
                elif b <= v:
                    j += 1
                elif a == b:
                    count += 1
                    i += 1
                    j += 1
                elif a < b:
                    i += 1
                else:
                    j += 1
    return count


KERNELS = {
    "pr": pagerank,
    "bfs": bfs,
    "sssp": sssp,
    "wcc": wcc,
    "tc": triangle_count,
}


def result_rows(result) -> list[tuple]:
    """Flatten a kernel result for CSV diffing: (vertex, value) rows, or a
    single ('total', count) row for scalars."""
    if isinstance(result, dict):
        return [(u, result[u]) for u in sorted(result)]
    return [("total", result)]
