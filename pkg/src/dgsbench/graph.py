"""Dynamic graph engine: multiversioned adjacency with pluggable storage.

A graph is a vertex index whose entries each own a neighbor container and
(in fine mode) a reader-writer lock.  A single global commit counter t(G)
orders transactions: it starts at 0 and each committed write bumps it by
one.  Writers stamp every version they created with the new value while
holding the clock latch, then publish the counter, so a reader that
pinned timestamp T sees exactly the commits numbered 1..T.

Concurrency regimes:

- ``fine``: writers declare the vertex set they will touch, lock those
  vertices in ascending id order (no deadlocks), and hold the exclusive
  locks until commit or abort.  Readers pin a timestamp and take the read
  side of one vertex lock at a time, just long enough to walk that
  vertex's container.
- ``coarse``: single-writer snapshots, implemented in `snapshots`.
- ``off``: no locks and no version metadata, for single-threaded baseline
  runs.  Mutations apply in place and cannot be rolled back.

Edge weights live in a graph-level map keyed by (source, target), updated
at commit; containers store neighbor ids only.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .containers import CONTAINER_KINDS, ContainerConfig, make_container
from .containers.base import MutationLog, OpCounters
from .errors import ConfigError, TxnStateError
from .locks import LockSet, ReaderRegistry, RWLock
from .rng import SplitMix64
from .vertex_index import VERTEX_INDEX_KINDS, make_vertex_index

CC_MODES = ("fine", "coarse", "off")


@dataclass
class GraphConfig:
    container: str = "sorted"
    cc: str = "fine"
    block_size: int = 256
    adaptive: bool = True
    adaptive_threshold: int = 256
    bloom_ratio: float = 1.0 / 16.0
    auto_create_vertices: bool = True
    vertex_index: str = "dense"
    encode_blocks: bool = True
    seed: int = 0
    track_op_log: bool = True

    def validate(self) -> None:
        if self.container not in CONTAINER_KINDS:
            raise ConfigError(f"unknown container: {self.container!r}")
        if self.cc not in CC_MODES:
            raise ConfigError(f"unknown concurrency mode: {self.cc!r}")
        if self.cc == "coarse" and self.container != "cow":
            raise ConfigError("coarse mode requires the cow container")
        if self.vertex_index not in VERTEX_INDEX_KINDS:
            raise ConfigError(f"unknown vertex index: {self.vertex_index!r}")
        if self.block_size < 2:
            raise ConfigError("block_size must be at least 2")
        if self.adaptive_threshold < 0:
            raise ConfigError("adaptive_threshold must be non-negative")
        if not 0 < self.bloom_ratio <= 1:
            raise ConfigError("bloom_ratio must be in (0, 1]")


def build_graph(cfg: GraphConfig):
    cfg.validate()
    if cfg.cc == "coarse":
        from .snapshots import CowGraph

        return CowGraph(cfg)
    return Graph(cfg)


def normalize_op(op) -> tuple[str, int, int | None, int | None]:
    """Accepts (code, ...) tuples or objects with code/u/v/w attributes."""
    if isinstance(op, tuple):
        code = op[0]
        if code in ("I", "S"):
            return (code, op[1], op[2], op[3] if len(op) > 3 else None)
        if code == "D":
            return ("D", op[1], op[2], None)
        if code in ("N", "V"):
            return (code, op[1], None, None)
        raise ConfigError(f"unknown op code: {code!r}")
    return (op.code, op.u, op.v, getattr(op, "w", None))


class _Clock:
    __slots__ = ("value", "latch")

    def __init__(self):
        self.value = 0
        self.latch = threading.Lock()


class Graph:
    """Fine-grained or uncontrolled dynamic graph (directed edges)."""

    def __init__(self, cfg: GraphConfig):
        cfg.validate()
        if cfg.cc == "coarse":
            raise ConfigError("use build_graph() for coarse mode")
        self.cfg = cfg
        self.counters = OpCounters()
        self._ccfg = ContainerConfig(
            block_size=cfg.block_size,
            adaptive=cfg.adaptive,
            adaptive_threshold=cfg.adaptive_threshold,
            bloom_ratio=cfg.bloom_ratio,
            versioned=cfg.cc != "off",
            encode_blocks=cfg.encode_blocks,
            seed=cfg.seed,
            counters=self.counters,
        )
        self._index = make_vertex_index(cfg.vertex_index, self.counters)
        self._clock = _Clock()
        self._readers = ReaderRegistry()
        self._weights: dict[tuple[int, int], int] = {}
        self._op_log: list[tuple] = []
        self._edge_count = 0
        self._rng = SplitMix64(cfg.seed ^ 0xD6E8FEB86659FD93)

    # -- plumbing ------------------------------------------------------------

    def _make_vertex_parts(self):
        container = make_container(self.cfg.container, self._ccfg)
        lock = RWLock() if self.cfg.cc == "fine" else None
        return container, lock

    def _ensure_entry(self, vid: int):
        if vid < 0:
            raise ConfigError(f"vertex ids must be non-negative, got {vid}")
        return self._index.ensure(vid, self._make_vertex_parts)

    @property
    def commit_ts(self) -> int:
        return self._clock.value

    @property
    def op_log(self) -> list[tuple]:
        return self._op_log

    def weight(self, u: int, v: int, default=None):
        return self._weights.get((u, v), default)

    # -- transactions ----------------------------------------------------------

    def begin_read(self) -> "ReadTxn":
        ts = self._clock.value
        token = self._readers.register(ts) if self.cfg.cc == "fine" else None
        return ReadTxn(self, ts if self.cfg.cc != "off" else None, token)

    def begin_write(self, ops=None, write_set=None) -> "WriteTxn":
        normalized = [normalize_op(op) for op in ops] if ops else []
        txn = WriteTxn(self, normalized, write_set or ())
        for op in normalized:
            txn.apply(op)
        return txn

    # -- single-op conveniences (each one is its own transaction) -------------

    def insert_edge(self, u: int, v: int, w: int | None = None) -> int:
        txn = self.begin_write(ops=[("I", u, v, w)])
        return txn.commit()

    def delete_edge(self, u: int, v: int) -> int:
        txn = self.begin_write(ops=[("D", u, v)])
        return txn.commit()

    def insert_vertex(self, v: int) -> int:
        txn = self.begin_write(ops=[("N", v)])
        return txn.commit()

    def apply_ops(self, ops) -> list:
        """One transaction covering the whole batch; returns S/V results."""
        txn = self.begin_write(ops=ops)
        results = txn.results
        txn.commit()
        return results

    # -- untransacted reads at the latest committed timestamp -----------------

    def _read_ts(self) -> int | None:
        return None if self.cfg.cc == "off" else self._clock.value

    def search_edge(self, u: int, v: int) -> bool:
        return self._search_at(u, v, self._read_ts())

    def scan_neighbors(self, u: int) -> list[int]:
        return self._scan_at(u, self._read_ts())

    def degree(self, u: int) -> int:
        e = self._index.get(u)
        if e is None or not e.visible(self._read_ts()):
            return 0
        return e.degree

    def scan_vertices(self) -> list[int]:
        ts = self._read_ts()
        return [e.id for e in self._index.entries() if e.visible(ts)]

    def num_vertices(self) -> int:
        return len(self.scan_vertices())

    def num_edges(self) -> int:
        return self._edge_count

    def _search_at(self, u: int, v: int, ts: int | None) -> bool:
        e = self._index.get(u)
        if e is None or not e.visible(ts):
            return False
        if e.lock is not None:
            e.lock.acquire_shared()
            try:
                return e.container.contains(v, ts)
            finally:
                e.lock.release_shared()
        return e.container.contains(v, ts)

    def _scan_at(self, u: int, ts: int | None) -> list[int]:
        e = self._index.get(u)
        if e is None or not e.visible(ts):
            return []
        if e.lock is not None:
            e.lock.acquire_shared()
            try:
                return e.container.scan(ts)
            finally:
                e.lock.release_shared()
        return e.container.scan(ts)

    # -- maintenance -----------------------------------------------------------

    def watermark(self) -> int:
        """Oldest timestamp any active reader may still query."""
        return self._readers.watermark(self._clock.value)

    def compact(self, watermark: int | None = None) -> int:
        if self.cfg.cc == "off":
            return 0
        wm = self.watermark() if watermark is None else watermark
        reclaimed = 0
        for e in self._index.entries():
            if e.lock is not None:
                e.lock.acquire_exclusive()
                try:
                    reclaimed += e.container.compact(wm)
                finally:
                    e.lock.release_exclusive()
            else:
                reclaimed += e.container.compact(wm)
        return reclaimed

    def inject_versions(self, pct: float, per_key: int = 3, seed: int | None = None) -> int:
        """Stack extra committed versions on existing keys, stamped above the
        current timestamp, then advance the clock past them.  Readers pinned
        beforehand keep their view but must step over the new versions."""
        if self.cfg.cc == "off":
            raise ConfigError("version injection requires version metadata")
        rng = SplitMix64(self._rng.next_u64() if seed is None else seed)
        with self._clock.latch:
            base = self._clock.value
            injected = 0
            for e in self._index.entries():
                if e.lock is not None:
                    e.lock.acquire_exclusive()
                    try:
                        injected += e.container.inject_versions(pct, rng, base, per_key)
                    finally:
                        e.lock.release_exclusive()
                else:
                    injected += e.container.inject_versions(pct, rng, base, per_key)
            self._clock.value = base + per_key - 1
        return injected

    def check_invariants(self) -> None:
        for e in self._index.entries():
            e.container.check_invariants()
            if self.cfg.cc != "off":
                assert e.degree == e.container.visible_count(self._clock.value), (
                    f"degree cache out of sync for vertex {e.id}"
                )

    def memory_profile(self) -> dict[str, int]:
        total = {
            "payload_words": 0,
            "slack_words": 0,
            "version_extra_words": 0,
            "index_words": self._index.memory_words(),
            "bloom_bytes": 0,
            "encoded_bytes": 0,
        }
        for e in self._index.entries():
            mp = e.container.memory_profile()
            for k, v in mp.items():
                total[k] = total.get(k, 0) + v
        return total


class ReadTxn:
    """Snapshot reader pinned to one commit timestamp."""

    def __init__(self, graph: Graph, ts: int | None, token):
        self._g = graph
        self.ts = ts
        self._token = token
        self._open = True

    def search_edge(self, u: int, v: int) -> bool:
        return self._g._search_at(u, v, self.ts)

    def scan_neighbors(self, u: int) -> list[int]:
        return self._g._scan_at(u, self.ts)

    def degree(self, u: int) -> int:
        return len(self._g._scan_at(u, self.ts))

    def scan_vertices(self) -> list[int]:
        return [e.id for e in self._g._index.entries() if e.visible(self.ts)]

    def num_vertices(self) -> int:
        return len(self.scan_vertices())

    def close(self) -> None:
        if self._open:
            self._open = False
            if self._token is not None:
                self._g._readers.unregister(self._token)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class WriteTxn:
    """Two-phase locked writer; all locks taken up front, held to the end.

    In fine mode the touched vertex set is fixed at begin: the endpoints of
    every op passed in plus any extra ids in `write_set`.  Ops issued later
    through insert_edge/delete_edge must stay inside that set.
    """

    def __init__(self, graph: Graph, ops, extra_write_set):
        self._g = graph
        self._log = MutationLog()
        self._live_deltas: dict[int, int] = {}
        self._creations: list[int] = []
        self._weights: dict[tuple[int, int], int] = {}
        self._records: list[tuple] = []
        self.results: list = []
        self._state = "open"
        self._locks: LockSet | None = None
        if graph.cfg.cc == "fine":
            touched = set(extra_write_set)
            for code, u, v, _w in ops:
                touched.add(u)
                if v is not None:
                    touched.add(v)
            entries = [graph._ensure_entry(vid) for vid in sorted(touched)]
            self._locks = LockSet()
            self._locks.acquire(entries)

    def _entry(self, vid: int):
        if self._locks is not None:
            e = self._locks.entry_for(vid)
            if e is None:
                raise TxnStateError(f"vertex {vid} is outside the declared write set")
            return e
        return self._g._ensure_entry(vid)

    def _require_open(self):
        if self._state != "open":
            raise TxnStateError(f"transaction already {self._state}")

    def _materialize(self, vid: int, entry) -> None:
        if entry.created_ts is None:
            if self._g.cfg.cc == "off":
                entry.created_ts = 0  # no versioning: visible the moment it exists
            else:
                self._creations.append(vid)

    # -- mutations -------------------------------------------------------------

    def insert_edge(self, u: int, v: int, w: int | None = None) -> None:
        self._require_open()
        ue = self._entry(u)
        ve = self._entry(v)
        if not self._g.cfg.auto_create_vertices:
            if ue.created_ts is None or ve.created_ts is None:
                raise TxnStateError(
                    f"edge ({u}, {v}) references a missing vertex and "
                    "auto vertex creation is disabled"
                )
        if self._g.cfg.cc == "off":
            delta = ue.container.raw_mutate(v, False)
        else:
            delta = ue.container.mutate(v, False, self._log)
        self._live_deltas[u] = self._live_deltas.get(u, 0) + delta
        self._materialize(u, ue)
        self._materialize(v, ve)
        if w is not None:
            self._weights[(u, v)] = w
        self._records.append(("I", u, v, w))

    def delete_edge(self, u: int, v: int) -> None:
        """Deleting never materializes a vertex; absent edges are no-ops."""
        self._require_open()
        ue = self._entry(u)
        if self._g.cfg.cc == "off":
            delta = ue.container.raw_mutate(v, True)
        else:
            delta = ue.container.mutate(v, True, self._log)
        self._live_deltas[u] = self._live_deltas.get(u, 0) + delta
        self._records.append(("D", u, v, None))

    def insert_vertex(self, v: int) -> None:
        self._require_open()
        ve = self._entry(v)
        self._materialize(v, ve)
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

    # -- read-your-writes --------------------------------------------------------

    def search_edge(self, u: int, v: int) -> bool:
        self._require_open()
        if self._locks is not None and self._locks.covers(u):
            e = self._locks.entry_for(u)
            return e.container.contains(v, None)
        return self._g._search_at(u, v, self._g._read_ts())

    def scan_neighbors(self, u: int) -> list[int]:
        self._require_open()
        if self._locks is not None and self._locks.covers(u):
            e = self._locks.entry_for(u)
            return e.container.scan(None)
        return self._g._scan_at(u, self._g._read_ts())

    # -- outcome ---------------------------------------------------------------

    def commit(self) -> int:
        self._require_open()
        g = self._g
        with g._clock.latch:
            cts = g._clock.value + 1
            self._log.stamp(cts)
            for vid in self._creations:
                e = self._entry(vid)
                if e.created_ts is None:
                    e.created_ts = cts
            for vid, delta in self._live_deltas.items():
                if delta:
                    e = self._entry(vid)
                    e.degree += delta
                    g._edge_count += delta
            g._weights.update(self._weights)
            if g.cfg.track_op_log:
                for seq, (code, u, v, w) in enumerate(self._records):
                    g._op_log.append((cts, seq, code, u, v, w))
            g._clock.value = cts  # publish last: readers at cts see it all
        self._finish("committed")
        return cts

    def abort(self) -> None:
        self._require_open()
        if self._g.cfg.cc == "off":
            raise TxnStateError("cannot roll back without version metadata")
        self._log.undo()
        self._finish("aborted")

    def _finish(self, state: str) -> None:
        self._state = state
        if self._locks is not None:
            self._locks.release()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._state == "open":
            if exc_type is None:
                self.commit()
            elif self._g.cfg.cc == "off":
                # raw mutations cannot roll back; let the original error surface
                self._finish("broken")
            else:
                self.abort()
        return False
