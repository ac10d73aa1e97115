"""Coarse-grained concurrency: single writer, immutable published snapshots.

The whole graph is one persistent structure: a path-copied balanced tree
mapping vertex id to an immutable `CowNeighbors` value.  A writer (there
is at most one, enforced by a token) builds the next root privately and
publishes it with commit timestamp t+1.  Readers pin whatever snapshot is
latest at begin and then run completely latch-free: nothing reachable
from a published root is ever mutated.

Snapshots are refcounted.  Publishing sweeps superseded snapshots that no
reader holds; a pinned snapshot survives any number of later commits
bit-for-bit (checksums stay stable).
"""

from __future__ import annotations

import hashlib
import threading
from concurrent.futures import ThreadPoolExecutor

from .containers.cow_tree import (
    CowNeighbors,
    tree_get,
    tree_insert,
    tree_items,
    tree_size,
)
from .errors import ConfigError, TxnStateError
from .graph import GraphConfig, normalize_op
from .locks import WriterToken


class Snapshot:
    """One published graph version; immutable, shareable, checksummable."""

    __slots__ = ("ts", "root", "vcount", "ecount", "refcount", "flat")

    def __init__(self, ts: int, root, vcount: int, ecount: int):
        self.ts = ts
        self.root = root
        self.vcount = vcount
        self.ecount = ecount
        self.refcount = 0
        self.flat: list | None = None

    def _value(self, u: int) -> CowNeighbors | None:
        flat = self.flat
        if flat is not None:
            return flat[u] if 0 <= u < len(flat) else None
        return tree_get(self.root, u)

    def search_edge(self, u: int, v: int) -> bool:
        nb = self._value(u)
        return nb is not None and nb.contains(v)

    def scan_neighbors(self, u: int) -> list[int]:
        nb = self._value(u)
        return nb.scan() if nb is not None else []

    def degree(self, u: int) -> int:
        nb = self._value(u)
        return nb.count if nb is not None else 0

    def scan_vertices(self) -> list[int]:
        return [vid for vid, _nb in tree_items(self.root)]

    def num_vertices(self) -> int:
        return self.vcount

    def num_edges(self) -> int:
        return self.ecount

    def checksum(self) -> str:
        h = hashlib.sha256()
        for vid, nb in tree_items(self.root):
            h.update(vid.to_bytes(8, "little"))
            h.update(nb.structural_digest().encode())
        return h.hexdigest()

    def flatten(self) -> list:
        """Dense position array: slot u holds N(u)'s root, skipping the
        vertex-tree descent on later reads.  Safe to cache: the snapshot
        is immutable, so the array can never go stale."""
        if self.flat is None:
            size = 0
            for vid, _nb in tree_items(self.root):
                size = max(size, vid + 1)
            flat: list = [None] * size
            for vid, nb in tree_items(self.root):
                flat[vid] = nb
            self.flat = flat
        return self.flat


class SnapshotReadTxn:
    """Reader pinned to one snapshot; wait-free after begin."""

    def __init__(self, graph: "CowGraph", snap: Snapshot):
        self._g = graph
        self._snap = snap
        self._open = True

    @property
    def ts(self) -> int:
        return self._snap.ts

    @property
    def snapshot(self) -> Snapshot:
        return self._snap

    def search_edge(self, u: int, v: int) -> bool:
        return self._snap.search_edge(u, v)

    def scan_neighbors(self, u: int) -> list[int]:
        return self._snap.scan_neighbors(u)

    def degree(self, u: int) -> int:
        return self._snap.degree(u)

    def scan_vertices(self) -> list[int]:
        return self._snap.scan_vertices()

    def num_vertices(self) -> int:
        return self._snap.num_vertices()

    def close(self) -> None:
        if self._open:
            self._open = False
            self._g._unpin(self._snap)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class CoarseWriteTxn:
    """Holds the writer token; stages a new root by path copying."""

    def __init__(self, graph: "CowGraph"):
        self._g = graph
        graph._token.acquire()
        base = graph._latest
        self._root = base.root
        self._vcount = base.vcount
        self._ecount = base.ecount
        self._records: list[tuple] = []
        self._weights: dict[tuple[int, int], int] = {}
        self.results: list = []
        self._state = "open"

    def _require_open(self):
        if self._state != "open":
            raise TxnStateError(f"transaction already {self._state}")

    def _get(self, u: int) -> CowNeighbors | None:
        return tree_get(self._root, u)

    def _put(self, u: int, value: CowNeighbors, was_absent: bool) -> None:
        self._root = tree_insert(self._root, u, value)
        if was_absent:
            self._vcount += 1

    def _fresh(self) -> CowNeighbors:
        return CowNeighbors.empty(self._g.cfg.block_size, self._g.cfg.encode_blocks)

    def insert_edge(self, u: int, v: int, w: int | None = None) -> None:
        self._require_open()
        nb = self._get(u)
        if nb is None and not self._g.cfg.auto_create_vertices:
            raise TxnStateError(f"vertex {u} does not exist")
        base = nb if nb is not None else self._fresh()
        newval = base.insert(v)
        self._ecount += newval.count - base.count
        self._put(u, newval, nb is None)
        if self._get(v) is None:
            if not self._g.cfg.auto_create_vertices:
                raise TxnStateError(f"vertex {v} does not exist")
            self._put(v, self._fresh(), True)
        if w is not None:
            self._weights[(u, v)] = w
        self._records.append(("I", u, v, w))

    def delete_edge(self, u: int, v: int) -> None:
        self._require_open()
        nb = self._get(u)
        if nb is not None:
            newval = nb.delete(v)
            self._ecount += newval.count - nb.count
            self._put(u, newval, False)
        self._records.append(("D", u, v, None))

    def insert_vertex(self, v: int) -> None:
        self._require_open()
        if self._get(v) is None:
            self._put(v, self._fresh(), True)
        self._records.append(("N", v, None, None))

    def apply(self, op) -> None:
        code, u, v, w = normalize_op(op)
        if code == "I":
            self.insert_edge(u, v, w)
        elif code == "D":
            self.delete_edge(u, v)
        elif code == "N":
            self.insert_vertex(u)
        elif code == "S":
            self.results.append(self.search_edge(u, v))
        elif code == "V":
            self.results.append(self.scan_neighbors(u))

    def search_edge(self, u: int, v: int) -> bool:
        self._require_open()
        nb = self._get(u)
        return nb is not None and nb.contains(v)

    def scan_neighbors(self, u: int) -> list[int]:
        self._require_open()
        nb = self._get(u)
        return nb.scan() if nb is not None else []

    def commit(self) -> int:
        self._require_open()
        g = self._g
        with g._latch:
            ts = g._latest.ts + 1
            snap = Snapshot(ts, self._root, self._vcount, self._ecount)
            g._snapshots[ts] = snap
            g._latest = snap
            g._weights.update(self._weights)
            if g.cfg.track_op_log:
                for seq, (code, u, v, w) in enumerate(self._records):
                    g._op_log.append((ts, seq, code, u, v, w))
            g._sweep_locked()
        self._state = "committed"
        g._token.release()
        return ts

    def abort(self) -> None:
        self._require_open()
        self._state = "aborted"
        self._g._token.release()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._state == "open":
            if exc_type is None:
                self.commit()
            else:
                self.abort()
        return False


class CowGraph:
    """Single-writer graph over refcounted immutable snapshots."""

    def __init__(self, cfg: GraphConfig):
        cfg.validate()
        if cfg.cc != "coarse":
            raise ConfigError("CowGraph is the coarse-mode engine")
        self.cfg = cfg
        self._token = WriterToken()
        self._latch = threading.Lock()
        genesis = Snapshot(0, None, 0, 0)
        self._latest = genesis
        self._snapshots: dict[int, Snapshot] = {0: genesis}
        self._weights: dict[tuple[int, int], int] = {}
        self._op_log: list[tuple] = []

    # -- snapshot lifecycle ----------------------------------------------------

    def _unpin(self, snap: Snapshot) -> None:
        with self._latch:
            snap.refcount -= 1
            self._sweep_locked()

    def _sweep_locked(self) -> None:
        latest = self._latest.ts
        dead = [ts for ts, s in self._snapshots.items() if s.refcount == 0 and ts < latest]
        for ts in dead:
            del self._snapshots[ts]

    def live_snapshots(self) -> list[int]:
        with self._latch:
            return sorted(self._snapshots)

    # -- transactions ------------------------------------------------------------

    def begin_read(self) -> SnapshotReadTxn:
        with self._latch:
            snap = self._latest
            snap.refcount += 1
        return SnapshotReadTxn(self, snap)

    def begin_write(self, ops=None, write_set=None) -> CoarseWriteTxn:
        txn = CoarseWriteTxn(self)
        if ops:
            for op in ops:
                txn.apply(op)
        return txn

    def apply_batch(self, ops, workers: int | None = None) -> int:
        """One snapshot for the whole batch.  Mutations are grouped by
        source vertex and each group is folded into that vertex's value in
        one pass (`CowNeighbors.apply_many` rebuilds wholesale when the
        group is large relative to the set).  Groups touch disjoint
        values, so with workers > 1 they are computed in parallel and
        merged into the root serially."""
        normalized = [normalize_op(op) for op in ops]
        txn = CoarseWriteTxn(self)
        if not self.cfg.auto_create_vertices:
            # strict vertex checks need op-at-a-time application
            try:
                for op in normalized:
                    txn.apply(op)
                return txn.commit()
            except BaseException:
                if txn._state == "open":
                    txn.abort()
                raise
        try:
            groups: dict[int, list[tuple[int, bool]]] = {}
            order: list[int] = []
            targets: list[int] = []

            def flush() -> None:
                def fold(u: int):
                    nb = txn._get(u)
                    base = nb if nb is not None else txn._fresh()
                    return u, nb is None, base, base.apply_many(groups[u])

                if workers and workers > 1 and len(order) > 1:
                    with ThreadPoolExecutor(max_workers=workers) as pool:
                        folded = list(pool.map(fold, order))
                else:
                    folded = [fold(u) for u in order]
                for u, was_absent, base, newval in folded:
                    txn._ecount += newval.count - base.count
                    txn._put(u, newval, was_absent)
                if self.cfg.auto_create_vertices:
                    for v in targets:
                        if txn._get(v) is None:
                            txn._put(v, txn._fresh(), True)
                groups.clear()
                order.clear()
                targets.clear()

            for code, u, v, w in normalized:
                if code in ("I", "D"):
                    bucket = groups.setdefault(u, [])
                    if not bucket:
                        order.append(u)
                    bucket.append((v, code == "D"))
                    if code == "I":
                        targets.append(v)
                        if w is not None:
                            txn._weights[(u, v)] = w
                    txn._records.append((code, u, v, w if code == "I" else None))
                else:
                    flush()  # reads must see every staged edge op before them
                    if code == "N":
                        txn.insert_vertex(u)
                    elif code == "S":
                        txn.results.append(txn.search_edge(u, v))
                    elif code == "V":
                        txn.results.append(txn.scan_neighbors(u))
            flush()
            return txn.commit()
        except BaseException:
            if txn._state == "open":
                txn.abort()
            raise

    # -- single-op conveniences ----------------------------------------------------

    def insert_edge(self, u: int, v: int, w: int | None = None) -> int:
        txn = self.begin_write()
        txn.insert_edge(u, v, w)
        return txn.commit()

    def delete_edge(self, u: int, v: int) -> int:
        txn = self.begin_write()
        txn.delete_edge(u, v)
        return txn.commit()

    def insert_vertex(self, v: int) -> int:
        txn = self.begin_write()
        txn.insert_vertex(v)
        return txn.commit()

    def apply_ops(self, ops) -> list:
        txn = self.begin_write(ops=ops)
        results = txn.results
        txn.commit()
        return results

    # -- reads on the latest snapshot ------------------------------------------------

    @property
    def commit_ts(self) -> int:
        return self._latest.ts

    @property
    def op_log(self) -> list[tuple]:
        return self._op_log

    def weight(self, u: int, v: int, default=None):
        return self._weights.get((u, v), default)

    def search_edge(self, u: int, v: int) -> bool:
        return self._latest.search_edge(u, v)

    def scan_neighbors(self, u: int) -> list[int]:
        return self._latest.scan_neighbors(u)

    def degree(self, u: int) -> int:
        return self._latest.degree(u)

    def scan_vertices(self) -> list[int]:
        return self._latest.scan_vertices()

    def num_vertices(self) -> int:
        return self._latest.num_vertices()

    def num_edges(self) -> int:
        return self._latest.num_edges()

    def flatten(self) -> list:
        return self._latest.flatten()

    # -- maintenance -------------------------------------------------------------------

    def watermark(self) -> int:
        with self._latch:
            return min(s.ts for s in self._snapshots.values() if s.refcount > 0) \
                if any(s.refcount for s in self._snapshots.values()) else self._latest.ts

    def compact(self, watermark: int | None = None) -> int:
        """Old snapshots are the versions here; sweeping is automatic on
        publish, so explicit compaction has nothing left to do."""
        return 0

    def inject_versions(self, pct: float, per_key: int = 3, seed: int | None = None) -> int:
        """Republish the current graph per_key-1 times: old-version load in
        this regime is extra retained snapshots, which pinned readers never
        traverse."""
        n = 0
        for _ in range(per_key - 1):
            txn = self.begin_write()
            txn.commit()
        with self._latch:
            snap = self._latest
        for _vid, nb in tree_items(snap.root):
            n += nb.count
        return int(n * pct / 100)

    def check_invariants(self) -> None:
        snap = self._latest
        vcount = 0
        ecount = 0
        for _vid, nb in tree_items(snap.root):
            nb.check_invariants()
            vcount += 1
            ecount += nb.count
        assert vcount == snap.vcount, "vertex count out of sync"
        assert ecount == snap.ecount, "edge count out of sync"

    def memory_profile(self) -> dict[str, int]:
        snap = self._latest
        total = {
            "payload_words": 0,
            "slack_words": 0,
            "version_extra_words": 0,
            "index_words": tree_size(snap.root) * 5,
            "bloom_bytes": 0,
            "encoded_bytes": 0,
        }
        for _vid, nb in tree_items(snap.root):
            for k, v in nb.memory_profile().items():
                total[k] = total.get(k, 0) + v
        return total
