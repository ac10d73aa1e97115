"""Shared plumbing for neighbor containers.

Every container family stores one ``Entry`` per physical neighbor key (the
unsorted family is the exception: it stores one array element per version).
Containers never stamp or unlink versions themselves; they append undo and
stamp records to the transaction's ``MutationLog`` and the commit / abort
paths replay it.

Operation counters are always on.  They are plain integer adds, cheap
enough to leave enabled, and the complexity-trend checks read them instead
of timing anything.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..versioning import ChainVersion, chain_compact, chain_length, chain_visible


@dataclass
class OpCounters:
    searches: int = 0
    search_compares_total: int = 0
    search_compares_max: int = 0
    skip_searches: int = 0
    skip_node_visits_total: int = 0
    skip_node_visits_max: int = 0
    pma_moves: int = 0
    array_version_checks: int = 0
    vertex_probes: int = 0

    def note_search(self, compares: int) -> None:
        self.searches += 1
        self.search_compares_total += compares
        if compares > self.search_compares_max:
            self.search_compares_max = compares

    def note_skip_search(self, visits: int) -> None:
        self.skip_searches += 1
        self.skip_node_visits_total += visits
        if visits > self.skip_node_visits_max:
            self.skip_node_visits_max = visits

    def mean_search_compares(self) -> float:
        return self.search_compares_total / self.searches if self.searches else 0.0

    def mean_skip_visits(self) -> float:
        return self.skip_node_visits_total / self.skip_searches if self.skip_searches else 0.0

    def reset(self) -> None:
        for f in self.__dataclass_fields__:
            setattr(self, f, 0)


class Entry:
    """A physical neighbor slot: key plus its version chain head.

    ``head`` stays None in raw (no concurrency control) mode.
    """

    __slots__ = ("key", "head")

    def __init__(self, key: int, head: ChainVersion | None = None):
        self.key = key
        self.head = head


def counting_bisect_left(keys, key: int, counters: OpCounters) -> int:
    """bisect_left that reports how many key comparisons the loop made."""
    lo, hi = 0, len(keys)
    n = 0
    while lo < hi:
        mid = (lo + hi) >> 1
        n += 1
        if keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    counters.note_search(n)
    return lo


class MutationLog:
    """Provisional writes of one transaction, for stamping and rollback."""

    __slots__ = ("new_chain", "new_interval", "closed_interval", "new_root")

    def __init__(self) -> None:
        self.new_chain = []       # (container, entry, version, created_entry)
        self.new_interval = []    # (container, interval_version)
        self.closed_interval = []  # (container, interval_version, prior_end)
        self.new_root = []        # (container, root_version)

    def stamp(self, cts: int) -> None:
        for _c, _e, v, _created in self.new_chain:
            v.ts = cts
            # collapse same-transaction history: only the last op at a
            # timestamp is ever observable
            while v.prev is not None and v.prev.ts == cts:
                v.prev = v.prev.prev
        for _c, iv, _old in self.closed_interval:
            iv.end = cts
        for c, iv in self.new_interval:
            iv.begin = cts
            if iv.end == cts:  # opened and closed by the same transaction
                c._remove_interval(iv)
        for _c, rv in self.new_root:
            rv.ts = cts
            while rv.prev is not None and rv.prev.ts == cts:
                rv.prev = rv.prev.prev

    def undo(self) -> None:
        for c, rv in reversed(self.new_root):
            c._rollback_root(rv)
        for c, iv in reversed(self.new_interval):
            c._remove_interval(iv)
        for _c, iv, old_end in reversed(self.closed_interval):
            iv.end = old_end
        for c, entry, v, created in reversed(self.new_chain):
            if created:
                c._remove_entry(entry)
            else:
                entry.head = v.prev

    def is_empty(self) -> bool:
        return not (self.new_chain or self.new_interval or self.closed_interval or self.new_root)


def chain_apply(container, entry: Entry | None, is_delete: bool, log: MutationLog, add_entry):
    """Apply one provisional edge op to a chain-flavor container.

    ``entry`` is the existing slot for the key or None; ``add_entry`` places a
    fresh Entry and returns it.  Returns the change in live cardinality.
    """
    if entry is None:
        if is_delete:
            return 0  # deleting an edge that never existed commits as a no-op
        e = add_entry()
        v = ChainVersion(None, False, None)
        e.head = v
        log.new_chain.append((container, e, v, True))
        return 1
    live = entry.head is not None and not entry.head.is_delete
    if is_delete:
        if not live:
            return 0
        v = ChainVersion(None, True, entry.head)
        entry.head = v
        log.new_chain.append((container, entry, v, False))
        return -1
    # re-insert supersedes: push a fresh version even when already live
    v = ChainVersion(None, False, entry.head)
    entry.head = v
    log.new_chain.append((container, entry, v, False))
    return 0 if live else 1


def raw_apply(entry_exists: bool, is_delete: bool, add_entry, remove_entry) -> int:
    """Set-semantics apply for raw (no version metadata) mode."""
    if is_delete:
        if entry_exists:
            remove_entry()
            return -1
        return 0
    if entry_exists:
        return 0
    add_entry()
    return 1


def chain_inject(entries, pct: float, rng, base_ts: int, per_key: int = 3) -> int:
    """Stack extra insert versions on floor(pct%) of the keys visible at base_ts.

    New versions are stamped base_ts+1, base_ts+2, ...: a reader at base_ts
    walks past them and its visible set is unchanged, while a reader at the
    new latest timestamp sees the same keys through the fresh versions.
    """
    vis = [e for e in entries if chain_visible(e.head, base_ts)]
    k = int(len(vis) * pct / 100)
    for i in rng.sample_indices(len(vis), k):
        e = vis[i]
        need = per_key - chain_length(e.head)
        for step in range(1, need + 1):
            e.head = ChainVersion(base_ts + step, False, e.head)
    return k


def compact_chain_entries(entries, watermark: int) -> int:
    reclaimed = 0
    for e in entries:
        e.head, n = chain_compact(e.head, watermark)
        reclaimed += n
    return reclaimed
