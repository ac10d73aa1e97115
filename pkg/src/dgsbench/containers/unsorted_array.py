"""Unsorted dynamic array with interval versions and a membership filter.

Every version is its own array element; nothing is ever sorted.  Lookups
scan from the newest element backwards, so the latest version of a key is
found first and scans visit neighbors newest-to-oldest.  A bloom filter
sized from the array capacity short-circuits lookups for keys that were
never stored: a negative probe answers without touching a single element.

Stale (closed) versions stay in the array until compaction is explicitly
invoked; scans pay for them, which is the point of keeping them around in
benchmarks.
"""

from __future__ import annotations

from ..bloom import BloomFilter
from ..versioning import (
    INF_TS,
    INTERVAL_ENTRY_WORDS,
    PENDING_END,
    RAW_ENTRY_WORDS,
    IntervalVersion,
    interval_dead,
    interval_visible,
)

_MIN_CAPACITY = 8


class UnsortedNeighborArray:
    sorted_scan = False
    flavor = "interval"
    kind = "unsorted"

    __slots__ = ("elements", "capacity", "resizes", "versioned", "counters", "bloom", "_bloom_ratio")

    def __init__(self, cfg):
        self.elements: list = []  # IntervalVersion when versioned, bare int keys when raw
        self.capacity = _MIN_CAPACITY
        self.resizes = 0
        self.versioned = cfg.versioned
        self.counters = cfg.counters
        self._bloom_ratio = cfg.bloom_ratio
        self.bloom = BloomFilter(self.capacity, cfg.bloom_ratio)

    # -- lookups ---------------------------------------------------------

    def _newest_version(self, key: int) -> IntervalVersion | None:
        """Latest physical version of key, or None.  Respects the filter."""
        if not self.bloom.might_contain(key):
            return None
        checks = 0
        for i in range(len(self.elements) - 1, -1, -1):
            checks += 1
            v = self.elements[i]
            if v.key == key:
                self.counters.array_version_checks += checks
                return v
        self.counters.array_version_checks += checks
        return None

    def contains(self, key: int, ts: int | None = None) -> bool:
        if not self.versioned:
            if not self.bloom.might_contain(key):
                return False
            checks = 0
            for i in range(len(self.elements) - 1, -1, -1):
                checks += 1
                if self.elements[i] == key:
                    self.counters.array_version_checks += checks
                    return True
            self.counters.array_version_checks += checks
            return False
        if ts is None:
            v = self._newest_version(key)
            return v is not None and v.end == INF_TS
        # an old window may be the visible one, so walk every version of key
        if not self.bloom.might_contain(key):
            return False
        checks = 0
        for i in range(len(self.elements) - 1, -1, -1):
            checks += 1
            v = self.elements[i]
            if v.key == key and interval_visible(v, ts):
                self.counters.array_version_checks += checks
                return True
        self.counters.array_version_checks += checks
        return False

    def scan(self, ts: int | None = None) -> list[int]:
        """Visible keys, newest-to-oldest by physical position."""
        if not self.versioned:
            return list(reversed(self.elements))
        out = []
        checks = 0
        for i in range(len(self.elements) - 1, -1, -1):
            checks += 1
            v = self.elements[i]
            if interval_visible(v, ts):
                out.append(v.key)
        self.counters.array_version_checks += checks
        return out

    def visible_count(self, ts: int | None = None) -> int:
        if not self.versioned:
            return len(self.elements)
        return sum(1 for v in self.elements if interval_visible(v, ts))

    def physical_entries(self) -> int:
        return len(self.elements)

    def physical_keys(self) -> int:
        if not self.versioned:
            return len(self.elements)
        return len({v.key for v in self.elements})

    # -- mutation --------------------------------------------------------

    def _append(self, element) -> None:
        self.elements.append(element)
        if len(self.elements) > self.capacity:
            self.capacity *= 2
            keys = self.elements if not self.versioned else [v.key for v in self.elements]
            self.bloom = BloomFilter.rebuilt(self.capacity, keys, self._bloom_ratio)
            self.resizes += 1

    def mutate(self, key: int, is_delete: bool, log) -> int:
        newest = self._newest_version(key)
        live = newest is not None and newest.end == INF_TS
        if is_delete:
            if not live:
                return 0
            log.closed_interval.append((self, newest, newest.end))
            newest.end = PENDING_END
            return -1
        delta = 0 if live else 1
        if live:
            log.closed_interval.append((self, newest, newest.end))
            newest.end = PENDING_END
        v = IntervalVersion(key, None, INF_TS)
        self._append(v)
        self.bloom.add(key)
        log.new_interval.append((self, v))
        return delta

    def raw_mutate(self, key: int, is_delete: bool) -> int:
        if is_delete:
            if not self.bloom.might_contain(key):
                return 0
            for i in range(len(self.elements) - 1, -1, -1):
                if self.elements[i] == key:
                    del self.elements[i]
                    return -1
            return 0
        if self.bloom.might_contain(key):
            checks = 0
            for i in range(len(self.elements) - 1, -1, -1):
                checks += 1
                if self.elements[i] == key:
                    # reinsert refreshes recency, matching the versioned
                    # flavor: scans report the newest insert first
                    del self.elements[i]
                    self.elements.append(key)
                    self.counters.array_version_checks += checks
                    return 0
            self.counters.array_version_checks += checks
        self._append(key)
        self.bloom.add(key)
        return 1

    def _remove_interval(self, version: IntervalVersion) -> None:
        for i in range(len(self.elements) - 1, -1, -1):
            if self.elements[i] is version:
                del self.elements[i]
                return
        raise AssertionError("interval version not found during rollback")

    # -- maintenance -----------------------------------------------------

    def compact(self, watermark: int) -> int:
        """Drop versions invisible to every reader at or above the watermark."""
        before = len(self.elements)
        self.elements = [v for v in self.elements if not interval_dead(v, watermark)]
        return before - len(self.elements)

    def inject_versions(self, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
        """Split floor(pct%) of the live windows into per_key consecutive ones.

        Replacement is positional, so scan order at base_ts is unchanged;
        the extra windows begin after base_ts and only cost scan work.
        """
        vis_idx = [
            i
            for i, v in enumerate(self.elements)
            if interval_visible(v, base_ts) and v.end == INF_TS
        ]
        k = int(len(vis_idx) * pct / 100)
        chosen = sorted(vis_idx[i] for i in rng.sample_indices(len(vis_idx), k))
        for offset, pos in enumerate(chosen):
            at = pos + offset * (per_key - 1)
            v = self.elements[at]
            pieces = [IntervalVersion(v.key, v.begin, base_ts + 1)]
            for step in range(1, per_key - 1):
                pieces.append(IntervalVersion(v.key, base_ts + step, base_ts + step + 1))
            pieces.append(IntervalVersion(v.key, base_ts + per_key - 1, v.end))
            self.elements[at: at + 1] = pieces
        return k

    def check_invariants(self) -> None:
        if not self.versioned:
            assert len(set(self.elements)) == len(self.elements)
            for key in self.elements:
                assert self.bloom.might_contain(key), "filter lost a stored key"
            return
        live: dict[int, list[tuple[int, int]]] = {}
        for v in self.elements:
            assert self.bloom.might_contain(v.key), "filter lost a stored key"
            if v.begin is None or v.end == PENDING_END:
                continue
            assert v.begin < v.end, "empty or inverted version window"
            live.setdefault(v.key, []).append((v.begin, v.end))
        for windows in live.values():
            windows.sort()
            for (b1, e1), (b2, _e2) in zip(windows, windows[1:]):
                assert e1 <= b2, "version windows of one key overlap"

    def memory_profile(self) -> dict[str, int]:
        entry_words = INTERVAL_ENTRY_WORDS if self.versioned else RAW_ENTRY_WORDS
        return {
            "payload_words": len(self.elements) * entry_words,
            "slack_words": (self.capacity - len(self.elements)) * entry_words,
            "version_extra_words": 0,  # every version is a full element here
            "index_words": 2,
            "bloom_bytes": self.bloom.nbytes,
        }
