"""Segmented skip list, plus the adaptive wrapper that starts small sets
as plain sorted arrays.

Neighbors live in sorted blocks holding between B/2 and B entries (a lone
block is exempt).  A skip list indexes the blocks, keyed by each block's
first element.  Tower heights are geometric with p = 1/2, capped at 24,
drawn from a per-container deterministic generator.  A full block splits
into two equal halves; a raw-mode underflow merges with a sibling or
rebalances entries across the pair.

The adaptive wrapper keeps a vertex's neighbors in a sorted dynamic array
until the set outgrows the configured threshold, then migrates every entry
(version chains intact) into a skip list.  Migration is one way.
"""

from __future__ import annotations

from ..rng import SplitMix64
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
)
from .sorted_array import SortedNeighborArray

MAX_LEVEL = 24


class _Node:
    __slots__ = ("key", "entries", "keys", "forward")

    def __init__(self, key: int, entries: list[Entry], height: int):
        self.key = key
        self.entries = entries
        self.keys = [e.key for e in entries]
        self.forward: list[_Node | None] = [None] * height


class SegmentedSkipList:
    sorted_scan = True
    flavor = "chain"
    kind = "segsl"

    __slots__ = ("B", "head", "level", "rng", "versioned", "counters", "n_entries")

    def __init__(self, cfg):
        self.B = cfg.block_size
        self.head = _Node(-1, [], MAX_LEVEL)  # sentinel; key unused
        self.level = 1
        self.rng = SplitMix64(cfg.seed)
        self.versioned = cfg.versioned
        self.counters = cfg.counters
        self.n_entries = 0

    # -- search ----------------------------------------------------------

    def _collect_update(self, key: int) -> list[_Node]:
        """Predecessor node per level (strictly smaller block key)."""
        update = [self.head] * MAX_LEVEL
        node = self.head
        for lvl in range(self.level - 1, -1, -1):
            nxt = node.forward[lvl]
            while nxt is not None and nxt.key < key:
                node = nxt
                nxt = node.forward[lvl]
            update[lvl] = node
        return update

    def _find_block(self, key: int) -> tuple[_Node | None, list[_Node]]:
        """Block that owns `key` (greatest block key <= key, or the first
        block when key precedes everything), plus the splice vector."""
        update = [self.head] * MAX_LEVEL
        node = self.head
        visits = 0
        for lvl in range(self.level - 1, -1, -1):
            nxt = node.forward[lvl]
            while nxt is not None:
                visits += 1
                if nxt.key < key:
                    node = nxt
                    nxt = node.forward[lvl]
                else:
                    break
            update[lvl] = node
        cand = node.forward[0]
        if cand is not None and cand.key == key:
            target = cand
        elif node is self.head:
            target = self.head.forward[0]
        else:
            target = node
        self.counters.note_skip_search(visits)
        return target, update

    def _entry_at(self, target: _Node | None, key: int) -> tuple[Entry | None, int]:
        if target is None:
            return None, 0
        pos = counting_bisect_left(target.keys, key, self.counters)
        if pos < len(target.keys) and target.keys[pos] == key:
            return target.entries[pos], pos
        return None, pos

    def contains(self, key: int, ts: int | None = None) -> bool:
        target, _ = self._find_block(key)
        entry, _ = self._entry_at(target, key)
        if entry is None:
            return False
        if not self.versioned:
            return True
        if ts is None:
            return entry.head is not None and not entry.head.is_delete
        return chain_visible(entry.head, ts)

    def scan(self, ts: int | None = None) -> list[int]:
        out = []
        node = self.head.forward[0]
        while node is not None:
            if not self.versioned:
                out.extend(node.keys)
            else:
                for e in node.entries:
                    if chain_visible(e.head, ts):
                        out.append(e.key)
            node = node.forward[0]
        return out

    def visible_count(self, ts: int | None = None) -> int:
        if not self.versioned:
            return self.n_entries
        count = 0
        node = self.head.forward[0]
        while node is not None:
            for e in node.entries:
                if chain_visible(e.head, ts):
                    count += 1
            node = node.forward[0]
        return count

    def physical_entries(self) -> int:
        return self.n_entries

    def physical_keys(self) -> int:
        return self.n_entries

    def _all_entries(self) -> list[Entry]:
        out = []
        node = self.head.forward[0]
        while node is not None:
            out.extend(node.entries)
            node = node.forward[0]
        return out

    # -- structural edits --------------------------------------------------

    def _splice_in(self, node: _Node) -> None:
        update = self._collect_update(node.key)
        height = len(node.forward)
        if height > self.level:
            self.level = height
        for lvl in range(height):
            node.forward[lvl] = update[lvl].forward[lvl]
            update[lvl].forward[lvl] = node

    def _splice_out(self, node: _Node) -> None:
        update = self._collect_update(node.key)
        for lvl in range(len(node.forward)):
            if update[lvl].forward[lvl] is node:
                update[lvl].forward[lvl] = node.forward[lvl]
        while self.level > 1 and self.head.forward[self.level - 1] is None:
            self.level -= 1

    def _place(self, key: int, target: _Node | None, pos: int, entry: Entry | None = None) -> Entry:
        e = entry if entry is not None else Entry(key)
        if target is None:
            node = _Node(key, [e], self.rng.coin_run_level(MAX_LEVEL))
            self._splice_in(node)
        else:
            target.entries.insert(pos, e)
            target.keys.insert(pos, key)
            if pos == 0:
                target.key = key  # only the first block can gain a smaller head
            if len(target.entries) > self.B:
                self._split(target)
        self.n_entries += 1
        return e

    def _split(self, node: _Node) -> None:
        half = len(node.entries) // 2
        upper_entries = node.entries[half:]
        node.entries = node.entries[:half]
        node.keys = node.keys[:half]
        new = _Node(upper_entries[0].key, upper_entries, self.rng.coin_run_level(MAX_LEVEL))
        self._splice_in(new)

    def _remove_at(self, target: _Node, pos: int) -> None:
        del target.entries[pos]
        del target.keys[pos]
        self.n_entries -= 1
        if not target.entries:
            self._splice_out(target)
            return
        if pos == 0:
            target.key = target.keys[0]
        if len(target.entries) < self.B // 2:
            self._fix_underflow(target)

    def _fix_underflow(self, node: _Node) -> None:
        nxt = node.forward[0]
        if nxt is not None:
            combo_e = node.entries + nxt.entries
            if len(combo_e) <= self.B:
                node.entries = combo_e
                node.keys = node.keys + nxt.keys
                self._splice_out(nxt)
            else:
                half = len(combo_e) // 2
                node.entries = combo_e[:half]
                nxt.entries = combo_e[half:]
                node.keys = [e.key for e in node.entries]
                nxt.keys = [e.key for e in nxt.entries]
                nxt.key = nxt.keys[0]
            return
    # node is the last block: borrow from its predecessor instead
        update = self._collect_update(node.key)
        prev = update[0]
        if prev is self.head:
            return  # single block, exempt from the fill floor
        combo_e = prev.entries + node.entries
        if len(combo_e) <= self.B:
            prev.entries = combo_e
            prev.keys = prev.keys + node.keys
            self._splice_out(node)
        else:
            half = len(combo_e) // 2
            prev.entries = combo_e[:half]
            node.entries = combo_e[half:]
            prev.keys = [e.key for e in prev.entries]
            node.keys = [e.key for e in node.entries]
            node.key = node.keys[0]

    # -- mutation ----------------------------------------------------------

    def mutate(self, key: int, is_delete: bool, log, owner=None) -> int:
        target, _update = self._find_block(key)
        entry, pos = self._entry_at(target, key)
        return chain_apply(
            owner if owner is not None else self,
            entry,
            is_delete,
            log,
            lambda: self._place(key, target, pos),
        )

    def raw_mutate(self, key: int, is_delete: bool) -> int:
        target, _update = self._find_block(key)
        entry, pos = self._entry_at(target, key)
        if is_delete:
            if entry is None:
                return 0
            self._remove_at(target, pos)
            return -1
        if entry is not None:
            return 0
        self._place(key, target, pos)
        return 1

    def _remove_entry(self, entry: Entry) -> None:
        target, _ = self._find_block(entry.key)
        found, pos = self._entry_at(target, entry.key)
        assert found is entry
        self._remove_at(target, pos)

    def adopt_entries(self, entries) -> None:
        """Move pre-sorted entries (chains intact) into this structure."""
        for e in entries:
            target, _ = self._find_block(e.key)
            _found, pos = self._entry_at(target, e.key)
            self._place(e.key, target, pos, entry=e)

    def bulk_load_sorted(self, keys, ts: int | None = None) -> None:
        self.adopt_entries(
            Entry(k, ChainVersion(ts, False, None) if self.versioned else None) for k in keys
        )

    # -- maintenance -------------------------------------------------------

    def compact(self, watermark: int) -> int:
        return compact_chain_entries(self._all_entries(), watermark)

    def inject_versions(self, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
        return chain_inject(self._all_entries(), pct, rng, base_ts, per_key)

    def check_invariants(self) -> None:
        seen = 0
        blocks = 0
        node = self.head.forward[0]
        prev_last = None
        multi = node is not None and node.forward[0] is not None
        while node is not None:
            blocks += 1
            assert node.entries, "empty block left spliced in"
            assert node.key == node.keys[0] == node.entries[0].key
            assert len(node.entries) <= self.B, "block over capacity"
            if multi:
                assert len(node.entries) >= self.B // 2, "underfull block"
            for i, e in enumerate(node.entries):
                assert e.key == node.keys[i]
                if i:
                    assert node.keys[i - 1] < node.keys[i]
            if prev_last is not None:
                assert prev_last < node.key, "blocks out of order"
            prev_last = node.keys[-1]
            seen += len(node.entries)
            node = node.forward[0]
        assert seen == self.n_entries
        # every higher level must be a subsequence of level 0
        level0 = []
        node = self.head.forward[0]
        while node is not None:
            level0.append(id(node))
            node = node.forward[0]
        base = set(level0)
        for lvl in range(1, self.level):
            node = self.head.forward[lvl]
            while node is not None:
                assert id(node) in base
                node = node.forward[lvl]

    def memory_profile(self) -> dict[str, int]:
        entry_words = CHAIN_ENTRY_WORDS if self.versioned else RAW_ENTRY_WORDS
        extra = 0
        index_words = 2 + MAX_LEVEL  # sentinel header
        payload_entries = 0
        blocks = 0
        node = self.head.forward[0]
        while node is not None:
            blocks += 1
            payload_entries += len(node.entries)
            index_words += 3 + len(node.forward)  # key, block ref, height, towers
            if self.versioned:
                for e in node.entries:
                    extra += (chain_length(e.head) - 1) * CHAIN_EXTRA_VERSION_WORDS
            node = node.forward[0]
        return {
            "payload_words": payload_entries * entry_words,
            "slack_words": (blocks * self.B - payload_entries) * entry_words,
            "version_extra_words": extra,
            "index_words": index_words,
            "bloom_bytes": 0,
        }


class AdaptiveNeighborIndex:
    """Sorted array below the threshold, segmented skip list above."""

    sorted_scan = True
    flavor = "chain"
    kind = "segsl"

    __slots__ = ("_cfg", "_impl", "threshold", "migrated")

    def __init__(self, cfg):
        self._cfg = cfg
        self._impl = SortedNeighborArray(cfg)
        self.threshold = cfg.adaptive_threshold
        self.migrated = False

    @property
    def mode(self) -> str:
        return "skip_list" if self.migrated else "sorted_array"

    @property
    def versioned(self) -> bool:
        return self._impl.versioned

    @property
    def counters(self):
        return self._impl.counters

    def _maybe_migrate(self) -> None:
        if not self.migrated and self._impl.physical_keys() > self.threshold:
            skip = SegmentedSkipList(self._cfg)
            skip.adopt_entries(self._impl.entries)
            self._impl = skip
            self.migrated = True

    def mutate(self, key: int, is_delete: bool, log) -> int:
        if self.migrated:
            delta = self._impl.mutate(key, is_delete, log, owner=self)
        else:
            # log against the wrapper: rollback must still find the entry
            # if a migration happens before the transaction resolves
            delta = _sorted_mutate_with_owner(self._impl, key, is_delete, log, self)
        self._maybe_migrate()
        return delta

    def raw_mutate(self, key: int, is_delete: bool) -> int:
        delta = self._impl.raw_mutate(key, is_delete)
        self._maybe_migrate()
        return delta

    def _remove_entry(self, entry: Entry) -> None:
        self._impl._remove_entry(entry)

    def contains(self, key: int, ts: int | None = None) -> bool:
        return self._impl.contains(key, ts)

    def scan(self, ts: int | None = None) -> list[int]:
        return self._impl.scan(ts)

    def visible_count(self, ts: int | None = None) -> int:
        return self._impl.visible_count(ts)

    def physical_entries(self) -> int:
        return self._impl.physical_entries()

    def physical_keys(self) -> int:
        return self._impl.physical_keys()

    def bulk_load_sorted(self, keys, ts: int | None = None) -> None:
        self._impl.bulk_load_sorted(keys, ts)
        self._maybe_migrate()

    def compact(self, watermark: int) -> int:
        return self._impl.compact(watermark)

    def inject_versions(self, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
        return self._impl.inject_versions(pct, rng, base_ts, per_key)

    def check_invariants(self) -> None:
        self._impl.check_invariants()
        if not self.migrated:
            assert self._impl.physical_keys() <= self.threshold

    def memory_profile(self) -> dict[str, int]:
        profile = dict(self._impl.memory_profile())
        profile["index_words"] += 1  # mode flag
        return profile


def _sorted_mutate_with_owner(impl: SortedNeighborArray, key, is_delete, log, owner) -> int:
    entry = impl._find(key)
    return chain_apply(owner, entry, is_delete, log, lambda: impl._place(key))
