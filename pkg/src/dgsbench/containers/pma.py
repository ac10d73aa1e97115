"""Packed memory array neighbor container.

Sorted entries live in a power-of-two cell array with deliberate gaps.
The array is viewed as a binary tree of windows over fixed-size segments;
each level has a density band, interpolated linearly from [0.5, 1.0] at
the leaves to [0.25, 0.75] at the root.  An insert that overflows its leaf
segment rebalances the smallest enclosing window still inside its band,
and when the root band is violated the array doubles.  Rebalances spread
entries evenly, which is what gives inserts their amortized polylog move
count; the ``pma_moves`` counter records every entry relocation.
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
from .base import Entry, chain_apply, chain_inject, compact_chain_entries

_MIN_CAP = 8


def _segment_size(cap: int) -> int:
    # power of two close to log2(capacity), at least 4
    lg = cap.bit_length() - 1
    s = 4
    while s < lg:
        s <<= 1
    return min(s, cap)


class PackedMemoryArray:
    sorted_scan = True
    flavor = "chain"
    kind = "pma"

    __slots__ = ("cells", "n", "seg", "versioned", "counters", "resizes")

    def __init__(self, cfg):
        self.cells: list[Entry | None] = [None] * _MIN_CAP
        self.n = 0
        self.seg = _segment_size(_MIN_CAP)
        self.versioned = cfg.versioned
        self.counters = cfg.counters
        self.resizes = 0

    # -- geometry --------------------------------------------------------

    @property
    def capacity(self) -> int:
        return len(self.cells)

    def _levels(self) -> int:
        return (len(self.cells) // self.seg).bit_length() - 1

    def _bounds(self, level: int) -> tuple[float, float]:
        top = self._levels()
        if top == 0:
            return 0.0, 1.0
        frac = level / top
        return 0.5 - 0.25 * frac, 1.0 - 0.25 * frac

    # -- lookups ---------------------------------------------------------

    def _locate(self, key: int) -> tuple[Entry | None, int]:
        """(entry, cell index) when found, else (None, predecessor cell index)."""
        cells = self.cells
        lo, hi = 0, len(cells) - 1
        pred = -1
        while lo <= hi:
            mid = (lo + hi) >> 1
            m = mid
            while m >= lo and cells[m] is None:
                m -= 1
            if m < lo:
                lo = mid + 1
                continue
            k = cells[m].key
            if k == key:
                return cells[m], m
            if k < key:
                pred = m
                lo = mid + 1
            else:
                hi = m - 1
        return None, pred

    def contains(self, key: int, ts: int | None = None) -> bool:
        e, _ = self._locate(key)
        if e is None:
            return False
        if not self.versioned:
            return True
        if ts is None:
            return e.head is not None and not e.head.is_delete
        return chain_visible(e.head, ts)

    def scan(self, ts: int | None = None) -> list[int]:
        if not self.versioned:
            return [e.key for e in self.cells if e is not None]
        out = []
        for e in self.cells:
            if e is not None and chain_visible(e.head, ts):
                out.append(e.key)
        return out

    def visible_count(self, ts: int | None = None) -> int:
        if not self.versioned:
            return self.n
        return sum(1 for e in self.cells if e is not None and chain_visible(e.head, ts))

    def physical_entries(self) -> int:
        return self.n

    def physical_keys(self) -> int:
        return self.n

    def _entries_in_order(self) -> list[Entry]:
        return [e for e in self.cells if e is not None]

    # -- rebalancing -----------------------------------------------------

    def _window(self, seg_idx: int, level: int) -> tuple[int, int]:
        width_segs = 1 << level
        first = (seg_idx // width_segs) * width_segs
        return first * self.seg, (first + width_segs) * self.seg

    def _occupancy(self, start: int, stop: int) -> int:
        cells = self.cells
        return sum(1 for i in range(start, stop) if cells[i] is not None)

    def _spread(self, entries: list[Entry], start: int, stop: int) -> None:
        """Place entries evenly across [start, stop); counts every placement."""
        width = stop - start
        m = len(entries)
        cells = self.cells
        for i in range(start, stop):
            cells[i] = None
        if not m:
            return
        for i, e in enumerate(entries):
            cells[start + (i * width) // m] = e
        self.counters.pma_moves += m

    def _grow(self, extra: Entry | None = None) -> None:
        entries = self._entries_in_order()
        if extra is not None:
            entries = _merge_one(entries, extra)
        self.cells = [None] * (len(self.cells) * 2)
        self.seg = _segment_size(len(self.cells))
        self.resizes += 1
        self._spread(entries, 0, len(self.cells))

    def _shrink(self) -> None:
        entries = self._entries_in_order()
        self.cells = [None] * max(_MIN_CAP, len(self.cells) // 2)
        self.seg = _segment_size(len(self.cells))
        self.resizes += 1
        self._spread(entries, 0, len(self.cells))

    def _insert_entry(self, key: int, pred: int) -> Entry:
        entry = Entry(key)
        seg_idx = (pred if pred >= 0 else 0) // self.seg
        for level in range(self._levels() + 1):
            start, stop = self._window(seg_idx, level)
            occ = self._occupancy(start, stop)
            _, upper = self._bounds(level)
            if occ + 1 <= upper * (stop - start):
                window_entries = [e for e in self.cells[start:stop] if e is not None]
                self._spread(_merge_one(window_entries, entry), start, stop)
                self.n += 1
                return entry
        self._grow(entry)
        self.n += 1
        return entry

    def _delete_cell(self, idx: int) -> None:
        self.cells[idx] = None
        self.n -= 1
        seg_idx = idx // self.seg
        for level in range(self._levels() + 1):
            start, stop = self._window(seg_idx, level)
            occ = self._occupancy(start, stop)
            lower, _ = self._bounds(level)
            if occ >= lower * (stop - start):
                if level > 0:  # the leaf fell out of its band, re-spread here
                    self._spread([e for e in self.cells[start:stop] if e is not None], start, stop)
                return
        if len(self.cells) > _MIN_CAP:
            self._shrink()

    # -- mutation --------------------------------------------------------

    def mutate(self, key: int, is_delete: bool, log) -> int:
        entry, pred = self._locate(key)
        return chain_apply(self, entry, is_delete, log, lambda: self._insert_entry(key, pred))

    def raw_mutate(self, key: int, is_delete: bool) -> int:
        entry, pos = self._locate(key)  # pos is the cell index when found
        if is_delete:
            if entry is None:
                return 0
            self._delete_cell(pos)
            return -1
        if entry is not None:
            return 0
        self._insert_entry(key, pos)
        return 1

    def _remove_entry(self, entry: Entry) -> None:
        _, idx = self._locate(entry.key)
        assert idx >= 0 and self.cells[idx] is entry
        self.cells[idx] = None
        self.n -= 1

    def bulk_load_sorted(self, keys, ts: int | None = None) -> None:
        assert self.n == 0
        entries = [
            Entry(k, ChainVersion(ts, False, None) if self.versioned else None) for k in keys
        ]
        cap = _MIN_CAP
        while cap < 2 * len(entries):  # target density 0.5
            cap *= 2
        self.cells = [None] * cap
        self.seg = _segment_size(cap)
        self.n = len(entries)
        if entries:
            self._spread(entries, 0, cap)

    # -- maintenance -----------------------------------------------------

    def compact(self, watermark: int) -> int:
        return compact_chain_entries(self._entries_in_order(), watermark)

    def inject_versions(self, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
        return chain_inject(self._entries_in_order(), pct, rng, base_ts, per_key)

    def check_invariants(self) -> None:
        last = None
        occ = 0
        for e in self.cells:
            if e is None:
                continue
            occ += 1
            assert last is None or last < e.key, "cell keys out of order"
            last = e.key
        assert occ == self.n
        if len(self.cells) > _MIN_CAP:
            # the root band is enforced lazily, when a rebalance walk reaches
            # the root; between those events only full occupancy bounds hold
            lower, _upper = self._bounds(self._levels())
            density = self.n / len(self.cells)
            assert lower <= density <= 1.0, f"root density {density} out of range"

    def memory_profile(self) -> dict[str, int]:
        entry_words = CHAIN_ENTRY_WORDS if self.versioned else RAW_ENTRY_WORDS
        extra = 0
        if self.versioned:
            for e in self.cells:
                if e is not None:
                    extra += (chain_length(e.head) - 1) * CHAIN_EXTRA_VERSION_WORDS
        return {
            "payload_words": self.n * entry_words,
            "slack_words": (len(self.cells) - self.n) * entry_words,
            "version_extra_words": extra,
            "index_words": 3,  # capacity, count, segment size
            "bloom_bytes": 0,
        }


def _merge_one(entries: list[Entry], extra: Entry) -> list[Entry]:
    lo, hi = 0, len(entries)
    while lo < hi:
        mid = (lo + hi) >> 1
        if entries[mid].key < extra.key:
            lo = mid + 1
        else:
            hi = mid
    return entries[:lo] + [extra] + entries[lo:]
