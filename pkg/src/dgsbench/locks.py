"""Reader-writer locks and the ordered multi-lock protocol for write queries.

Writers acquire exclusive locks on every vertex they touch, in ascending
vertex-id order, and hold them until commit or abort.  Ascending order makes
the wait-for graph acyclic, so writers block under contention but can never
deadlock.  Readers take a shared lock per operation and release it as soon
as the operation's data is copied out.

The lock prefers waiting writers: once a writer is queued, new shared
acquisitions wait.  Scans are short, so this keeps update streams moving
without starving anyone.
"""

from __future__ import annotations

import itertools
import threading


class RWLock:
    __slots__ = ("_cond", "_readers", "_writer", "_writers_waiting")

    def __init__(self) -> None:
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_shared(self) -> None:
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_shared(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_exclusive(self) -> None:
        with self._cond:
            self._writers_waiting += 1
            try:
                while self._writer or self._readers:
                    self._cond.wait()
            finally:
                self._writers_waiting -= 1
            self._writer = True

    def release_exclusive(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()


class LockSet:
    """Exclusive locks for one write transaction, acquired in id order."""

    __slots__ = ("entries", "_by_id", "_held")

    def __init__(self) -> None:
        self.entries = []
        self._by_id: dict[int, object] = {}
        self._held = False

    def acquire(self, entries) -> None:
        """entries: vertex entries, any order.  Blocks; never aborts."""
        ordered = sorted(entries, key=lambda e: e.id)
        for i in range(1, len(ordered)):
            if ordered[i].id == ordered[i - 1].id:
                raise ValueError("duplicate vertex in lock set")
        for entry in ordered:
            entry.lock.acquire_exclusive()
            self.entries.append(entry)
            self._by_id[entry.id] = entry
        self._held = True

    def release(self) -> None:
        for entry in reversed(self.entries):
            entry.lock.release_exclusive()
        self.entries = []
        self._by_id = {}
        self._held = False

    @property
    def held(self) -> bool:
        return self._held

    def covers(self, vid: int) -> bool:
        return vid in self._by_id

    def entry_for(self, vid: int):
        return self._by_id.get(vid)


class WriterToken:
    """Single-writer gate for the coarse regime."""

    __slots__ = ("_lock", "_owner")

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._owner = None

    def acquire(self) -> None:
        self._lock.acquire()
        self._owner = threading.get_ident()

    def release(self) -> None:
        self._owner = None
        self._lock.release()

    @property
    def held_by_current_thread(self) -> bool:
        return self._owner == threading.get_ident()

    @property
    def held(self) -> bool:
        return self._owner is not None


class ReaderRegistry:
    """Tracks active read timestamps; the minimum is the reclamation watermark."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._active: dict[int, int] = {}
        self._ids = itertools.count()

    def register(self, start_ts: int) -> int:
        with self._lock:
            token = next(self._ids)
            self._active[token] = start_ts
            return token

    def unregister(self, token: int) -> None:
        with self._lock:
            self._active.pop(token, None)

    def watermark(self, default: int) -> int:
        """Oldest active read timestamp, or `default` when no reader is live."""
        with self._lock:
            if not self._active:
                return default
            return min(self._active.values())

    def active_count(self) -> int:
        with self._lock:
            return len(self._active)
