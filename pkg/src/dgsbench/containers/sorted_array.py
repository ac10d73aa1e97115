"""Sorted dynamic array of neighbor entries.

Keys stay in ascending order, lookups are binary search, and inserting a
new key shifts the tail.  Growth doubles a tracked capacity so the
footprint model can account for slack slots the way a real allocator
would.  Versioned mode hangs a chain off each entry; raw mode stores bare
keys.
"""

from __future__ import annotations

from ..versioning import (
    CHAIN_ENTRY_WORDS,
    CHAIN_EXTRA_VERSION_WORDS,
    RAW_ENTRY_WORDS,
    ChainVersion,
    chain_length,
    chain_visible,
)
from .base import (
    Entry,
    chain_apply,
    chain_inject,
    compact_chain_entries,
    counting_bisect_left,
    raw_apply,
)

_MIN_CAPACITY = 4


class SortedNeighborArray:
    sorted_scan = True
    flavor = "chain"
    kind = "sorted"

    __slots__ = ("entries", "_keys", "capacity", "resizes", "versioned", "counters")

    def __init__(self, cfg):
        self.entries: list[Entry] = []
        self._keys: list[int] = []  # parallel to entries, for bisect
        self.capacity = _MIN_CAPACITY
        self.resizes = 0
        self.versioned = cfg.versioned
        self.counters = cfg.counters

    # -- lookups ---------------------------------------------------------

    def _find(self, key: int) -> Entry | None:
        pos = counting_bisect_left(self._keys, key, self.counters)
        if pos < len(self._keys) and self._keys[pos] == key:
            return self.entries[pos]
        return None

    def contains(self, key: int, ts: int | None = None) -> bool:
        e = self._find(key)
        if e is None:
            return False
        if not self.versioned:
            return True
        if ts is None:  # current membership: the newest record decides
            return e.head is not None and not e.head.is_delete
        return chain_visible(e.head, ts)

    def scan(self, ts: int | None = None) -> list[int]:
        if not self.versioned:
            return list(self._keys)
        out = []
        for e in self.entries:
            if chain_visible(e.head, ts):
                out.append(e.key)
        return out

    def visible_count(self, ts: int | None = None) -> int:
        if not self.versioned:
            return len(self.entries)
        return sum(1 for e in self.entries if chain_visible(e.head, ts))

    def physical_entries(self) -> int:
        return len(self.entries)

    def physical_keys(self) -> int:
        return len(self.entries)

    # -- mutation --------------------------------------------------------

    def _place(self, key: int) -> Entry:
        pos = counting_bisect_left(self._keys, key, self.counters)
        e = Entry(key)
        self.entries.insert(pos, e)
        self._keys.insert(pos, key)
        if len(self.entries) > self.capacity:
            self.capacity *= 2
            self.resizes += 1
        return e

    def _remove_entry(self, entry: Entry) -> None:
        pos = counting_bisect_left(self._keys, entry.key, self.counters)
        assert pos < len(self.entries) and self.entries[pos] is entry
        del self.entries[pos]
        del self._keys[pos]

    def mutate(self, key: int, is_delete: bool, log) -> int:
        entry = self._find(key)
        return chain_apply(self, entry, is_delete, log, lambda: self._place(key))

    def raw_mutate(self, key: int, is_delete: bool) -> int:
        entry = self._find(key)
        return raw_apply(
            entry is not None,
            is_delete,
            lambda: self._place(key),
            lambda: self._remove_entry(entry),
        )

    def bulk_load_sorted(self, keys, ts: int | None = None) -> None:
        """Install pre-sorted distinct keys directly; test and load helper."""
        assert not self.entries
        for k in keys:
            head = ChainVersion(ts, False, None) if self.versioned else None
            self.entries.append(Entry(k, head))
            self._keys.append(k)
        while self.capacity < len(self.entries):
            self.capacity *= 2
            self.resizes += 1

    # -- maintenance -----------------------------------------------------

    def compact(self, watermark: int) -> int:
        return compact_chain_entries(self.entries, watermark)

    def inject_versions(self, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
        return chain_inject(self.entries, pct, rng, base_ts, per_key)

    def check_invariants(self) -> None:
        for i in range(1, len(self._keys)):
            assert self._keys[i - 1] < self._keys[i], "keys out of order"
        for e, k in zip(self.entries, self._keys):
            assert e.key == k
            _check_chain(e.head, self.versioned)

    def memory_profile(self) -> dict[str, int]:
        entry_words = CHAIN_ENTRY_WORDS if self.versioned else RAW_ENTRY_WORDS
        extra = 0
        if self.versioned:
            for e in self.entries:
                extra += (chain_length(e.head) - 1) * CHAIN_EXTRA_VERSION_WORDS
        return {
            "payload_words": len(self.entries) * entry_words,
            "slack_words": (self.capacity - len(self.entries)) * entry_words,
            "version_extra_words": extra,
            "index_words": 2,  # length + capacity header
            "bloom_bytes": 0,
        }


def _check_chain(head, versioned: bool) -> None:
    if not versioned:
        assert head is None
        return
    assert head is not None, "versioned entry with no versions"
    last = None
    v = head
    while v is not None:
        if v.ts is not None:
            if last is not None:
                assert v.ts < last, "chain timestamps must strictly decrease"
            last = v.ts
        else:
            assert last is None, "provisional version below a committed one"
        v = v.prev
