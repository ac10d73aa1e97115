"""Vertex directory: maps vertex id to its adjacency state.

Three layouts, one interface.  `dense` indexes a slot array directly by
vertex id (best when ids are compact), `hash` is an open-addressed table
with linear probing (sparse id spaces), `avl` keeps a balanced tree
(ordered iteration without paying for id-range slack).

Lookups are lock-free: structures are grown copy-aside and swapped in, so
a reader always probes a consistent snapshot.  Entry creation serializes
on a short internal latch and is idempotent, which lets concurrent write
transactions race to ensure the same vertex.

Every lookup bumps the shared `vertex_probes` counter: one probe for a
dense slot, the probe-chain length for hash, nodes visited for avl.
"""

from __future__ import annotations

import threading

from .containers.base import OpCounters
from .containers.cow_tree import tree_insert, tree_items
from .errors import ConfigError

VERTEX_INDEX_KINDS = ("dense", "hash", "avl")


class VertexEntry:
    """Per-vertex adjacency state.

    `created_ts` is None until some committed transaction materializes the
    vertex; an unstamped entry is invisible plumbing that readers skip.
    `degree` caches the live neighbor count, maintained at commit.
    """

    __slots__ = ("id", "container", "lock", "created_ts", "degree")

    def __init__(self, vid: int, container, lock):
        self.id = vid
        self.container = container
        self.lock = lock
        self.created_ts: int | None = None
        self.degree = 0

    def visible(self, ts: int | None) -> bool:
        if self.created_ts is None:
            return False
        return ts is None or self.created_ts <= ts


class DenseVertexIndex:
    """Slot-per-id array; absent ids cost one probe and no comparisons."""

    kind = "dense"

    def __init__(self, counters: OpCounters):
        self._slots: list[VertexEntry | None] = [None] * 16
        self._count = 0
        self._latch = threading.Lock()
        self.counters = counters

    def get(self, vid: int) -> VertexEntry | None:
        self.counters.vertex_probes += 1
        slots = self._slots
        if 0 <= vid < len(slots):
            return slots[vid]
        return None

    def ensure(self, vid: int, make_container) -> VertexEntry:
        found = self.get(vid)
        if found is not None:
            return found
        with self._latch:
            slots = self._slots
            if vid >= len(slots):
                cap = len(slots)
                while cap <= vid:
                    cap *= 2
                grown = slots + [None] * (cap - len(slots))
                self._slots = slots = grown
            if slots[vid] is None:
                slots[vid] = VertexEntry(vid, *make_container())
                self._count += 1
            return slots[vid]

    def __len__(self) -> int:
        return self._count

    def entries(self) -> list[VertexEntry]:
        return [e for e in self._slots if e is not None]

    def memory_words(self) -> int:
        return len(self._slots)


class HashVertexIndex:
    """Open addressing with linear probing; grows at 0.7 load."""

    kind = "hash"
    _MULT = 0x9E3779B97F4A7C15

    def __init__(self, counters: OpCounters):
        self._table: list[VertexEntry | None] = [None] * 16
        self._count = 0
        self._latch = threading.Lock()
        self.counters = counters

    def _probe(self, table, vid: int):
        mask = len(table) - 1
        i = ((vid * self._MULT) & 0xFFFFFFFFFFFFFFFF) >> 32
        i &= mask
        probes = 0
        while True:
            probes += 1
            e = table[i]
            if e is None or e.id == vid:
                return i, e, probes
            i = (i + 1) & mask

    def get(self, vid: int) -> VertexEntry | None:
        _i, e, probes = self._probe(self._table, vid)
        self.counters.vertex_probes += probes
        return e

    def ensure(self, vid: int, make_container) -> VertexEntry:
        found = self.get(vid)
        if found is not None:
            return found
        with self._latch:
            if (self._count + 1) > 0.7 * len(self._table):
                bigger: list[VertexEntry | None] = [None] * (len(self._table) * 2)
                for e in self._table:
                    if e is not None:
                        j, _, _ = self._probe(bigger, e.id)
                        bigger[j] = e
                self._table = bigger
            i, e, _ = self._probe(self._table, vid)
            if e is None:
                e = VertexEntry(vid, *make_container())
                self._table[i] = e
                self._count += 1
            return e

    def __len__(self) -> int:
        return self._count

    def entries(self) -> list[VertexEntry]:
        out = [e for e in self._table if e is not None]
        out.sort(key=lambda e: e.id)
        return out

    def memory_words(self) -> int:
        return len(self._table)


class AvlVertexIndex:
    """Balanced tree keyed by id; iteration is ordered for free.

    Inserts path-copy and swap the root, so lookups never see a
    half-rebalanced tree.
    """

    kind = "avl"

    def __init__(self, counters: OpCounters):
        self._root = None
        self._count = 0
        self._latch = threading.Lock()
        self.counters = counters

    def get(self, vid: int) -> VertexEntry | None:
        node = self._root
        probes = 0
        hit = None
        while node is not None:
            probes += 1
            if vid == node.key:
                hit = node.value
                break
            node = node.left if vid < node.key else node.right
        self.counters.vertex_probes += max(probes, 1)
        return hit

    def ensure(self, vid: int, make_container) -> VertexEntry:
        found = self.get(vid)
        if found is not None:
            return found
        with self._latch:
            node = self._root
            while node is not None:
                if vid == node.key:
                    return node.value
                node = node.left if vid < node.key else node.right
            e = VertexEntry(vid, *make_container())
            self._root = tree_insert(self._root, vid, e)
            self._count += 1
            return e

    def __len__(self) -> int:
        return self._count

    def entries(self) -> list[VertexEntry]:
        return [v for _k, v in tree_items(self._root)]

    def memory_words(self) -> int:
        return self._count * 5  # key, value, children, height


def make_vertex_index(kind: str, counters: OpCounters):
    if kind == "dense":
        return DenseVertexIndex(counters)
    if kind == "hash":
        return HashVertexIndex(counters)
    if kind == "avl":
        return AvlVertexIndex(counters)
    raise ConfigError(f"unknown vertex index kind: {kind!r}")
