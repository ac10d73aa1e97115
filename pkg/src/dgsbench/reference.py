"""Brute-force reference model: replay the committed op log into plain dicts.

This is the authority every engine is checked against.  It knows nothing
about containers, locks, or versions; visibility is decided by scanning an
edge's committed history: the edge exists at time t iff the latest op at
or before t is an insert (ties within one commit broken by op order, so a
transaction's last word on an edge wins, matching commit-time squashing).

Vertices materialize at the first commit that inserts them explicitly or
names them as an endpoint of an inserted edge; deletes never materialize.
"""

from __future__ import annotations

from bisect import bisect_right


class ReferenceModel:
    def __init__(self):
        # (u, v) -> [(ts, seq, is_delete)] in commit order
        self.edge_history: dict[tuple[int, int], list[tuple[int, int, bool]]] = {}
        self.out_keys: dict[int, set[int]] = {}
        self.vertex_created: dict[int, int] = {}
        self.final_ts = 0

    @classmethod
    def from_log(cls, op_log) -> "ReferenceModel":
        """op_log rows: (ts, seq, code, u, v, w)."""
        model = cls()
        for ts, seq, code, u, v, _w in op_log:
            model.final_ts = max(model.final_ts, ts)
            if code == "I":
                model.edge_history.setdefault((u, v), []).append((ts, seq, False))
                model.out_keys.setdefault(u, set()).add(v)
                model._touch(u, ts)
                model._touch(v, ts)
            elif code == "D":
                model.edge_history.setdefault((u, v), []).append((ts, seq, True))
                model.out_keys.setdefault(u, set()).add(v)
            elif code == "N":
                model._touch(u, ts)
        return model

    def _touch(self, vid: int, ts: int) -> None:
        prior = self.vertex_created.get(vid)
        if prior is None or ts < prior:
            self.vertex_created[vid] = ts

    # -- queries --------------------------------------------------------------

    def edge_at(self, u: int, v: int, ts: int) -> bool:
        hist = self.edge_history.get((u, v))
        if not hist:
            return False
        i = bisect_right(hist, (ts, float("inf"), True)) - 1
        return i >= 0 and not hist[i][2]

    def _last_insert_event(self, u: int, v: int, ts: int):
        """(ts, seq) of the insert establishing the visible version."""
        hist = self.edge_history[(u, v)]
        i = bisect_right(hist, (ts, float("inf"), True)) - 1
        while i >= 0 and hist[i][2]:
            i -= 1
        return hist[i][0], hist[i][1]

    def neighbors_at(self, u: int, ts: int, order: str = "sorted") -> list[int]:
        if not self.vertex_visible(u, ts):
            return []
        vis = [v for v in self.out_keys.get(u, ()) if self.edge_at(u, v, ts)]
        if order == "unsorted":
            # newest-to-oldest by the insert that created the visible version
            vis.sort(key=lambda v: self._last_insert_event(u, v, ts), reverse=True)
        else:
            vis.sort()
        return vis

    def vertex_visible(self, vid: int, ts: int) -> bool:
        created = self.vertex_created.get(vid)
        return created is not None and created <= ts

    def vertices_at(self, ts: int) -> list[int]:
        return sorted(v for v, c in self.vertex_created.items() if c <= ts)

    def degree_at(self, u: int, ts: int) -> int:
        return len(self.neighbors_at(u, ts))

    def num_edges_at(self, ts: int) -> int:
        return sum(1 for (u, v) in self.edge_history if self.edge_at(u, v, ts))


def oracle_check(reader, model: ReferenceModel, at_ts: int | None, order: str = "sorted"):
    """Full-graph comparison of `reader` against the model at one timestamp.

    `reader` needs scan_vertices() and scan_neighbors(u).  at_ts None means
    the latest committed state (the only state an unversioned reader has).
    Returns (ok, divergence) where divergence names the first mismatch.
    """
    if at_ts is None:
        at_ts = model.final_ts
    got_vertices = list(reader.scan_vertices())
    want_vertices = model.vertices_at(at_ts)
    if sorted(got_vertices) != want_vertices:
        missing = set(want_vertices) - set(got_vertices)
        extra = set(got_vertices) - set(want_vertices)
        return False, {
            "kind": "vertex-set",
            "ts": at_ts,
            "missing": sorted(missing)[:10],
            "extra": sorted(extra)[:10],
        }
    for u in want_vertices:
        got = list(reader.scan_neighbors(u))
        want = model.neighbors_at(u, at_ts, order)
        if order not in ("sorted", "unsorted"):
            got, want = sorted(got), sorted(want)
        if got != want:
            return False, {
                "kind": "neighbors",
                "ts": at_ts,
                "vertex": u,
                "expected": want[:20],
                "got": got[:20],
            }
    return True, None
