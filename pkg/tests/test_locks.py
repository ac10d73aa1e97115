"""Lock-layer contracts: ascending-id acquisition, writer preference,
single-writer token, and the reader watermark registry."""

import threading
import time

import pytest

from dgsbench.locks import LockSet, ReaderRegistry, RWLock, WriterToken


class _FakeEntry:
    def __init__(self, vid):
        self.id = vid
        self.lock = _RecordingLock()


class _RecordingLock(RWLock):
    order_log = []

    def acquire_exclusive(self):
        super().acquire_exclusive()
        _RecordingLock.order_log.append(id(self))


def test_lockset_acquires_in_ascending_id_order():
    _RecordingLock.order_log = []
    entries = {vid: _FakeEntry(vid) for vid in (7, 2, 9)}
    ls = LockSet()
    ls.acquire(entries.values())
    expected = [id(entries[v].lock) for v in (2, 7, 9)]
    assert _RecordingLock.order_log == expected
    assert ls.covers(7) and ls.covers(2) and ls.covers(9)
    assert not ls.covers(3)
    assert ls.entry_for(9) is entries[9]
    ls.release()
    assert not ls.held
    assert ls.entry_for(9) is None


def test_lockset_single_vertex():
    e = _FakeEntry(4)
    ls = LockSet()
    ls.acquire([e])
    assert ls.held and ls.covers(4)
    ls.release()


def test_lockset_rejects_duplicates():
    with pytest.raises(ValueError):
        LockSet().acquire([_FakeEntry(1), _FakeEntry(1)])


def test_rwlock_shared_access_is_concurrent():
    lock = RWLock()
    inside = []
    barrier = threading.Barrier(3)

    def reader():
        lock.acquire_shared()
        barrier.wait(timeout=5)  # all three must be inside simultaneously
        inside.append(1)
        lock.release_shared()

    threads = [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=5)
    assert len(inside) == 3


def test_rwlock_writer_excludes_readers():
    lock = RWLock()
    lock.acquire_exclusive()
    got = []

    def reader():
        lock.acquire_shared()
        got.append("read")
        lock.release_shared()

    t = threading.Thread(target=reader)
    t.start()
    time.sleep(0.05)
    assert got == []  # blocked behind the writer
    lock.release_exclusive()
    t.join(timeout=5)
    assert got == ["read"]


def test_rwlock_waiting_writer_blocks_new_readers():
    lock = RWLock()
    lock.acquire_shared()
    order = []

    def writer():
        lock.acquire_exclusive()
        order.append("w")
        lock.release_exclusive()

    def late_reader():
        lock.acquire_shared()
        order.append("r")
        lock.release_shared()

    tw = threading.Thread(target=writer)
    tw.start()
    time.sleep(0.05)
    tr = threading.Thread(target=late_reader)
    tr.start()
    time.sleep(0.05)
    lock.release_shared()
    tw.join(timeout=5)
    tr.join(timeout=5)
    assert order[0] == "w"  # queued writer went first


def test_two_overlapping_writers_both_finish():
    # lock sets {1,5} and {5,9}: ordered acquisition means no deadlock
    entries = {vid: _FakeEntry(vid) for vid in (1, 5, 9)}
    done = []

    def txn(vids):
        for _ in range(200):
            ls = LockSet()
            ls.acquire([entries[v] for v in vids])
            ls.release()
        done.append(vids)

    t1 = threading.Thread(target=txn, args=((1, 5),))
    t2 = threading.Thread(target=txn, args=((5, 9),))
    t1.start()
    t2.start()
    t1.join(timeout=30)
    t2.join(timeout=30)
    assert len(done) == 2


def test_writer_token_mutual_exclusion():
    token = WriterToken()
    holders = []

    def writer(i):
        token.acquire()
        holders.append(i)
        assert token.held_by_current_thread
        time.sleep(0.01)
        holders.append(-i)
        token.release()

    threads = [threading.Thread(target=writer, args=(i,)) for i in (1, 2, 3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=10)
    # entries and exits strictly alternate: no two writers inside together
    for a, b in zip(holders[::2], holders[1::2]):
        assert a == -b


def test_reader_registry_watermark():
    reg = ReaderRegistry()
    assert reg.watermark(default=42) == 42
    t1 = reg.register(5)
    t2 = reg.register(3)
    assert reg.watermark(default=42) == 3
    reg.unregister(t2)
    assert reg.watermark(default=42) == 5
    reg.unregister(t1)
    assert reg.watermark(default=42) == 42
    assert reg.active_count() == 0


def test_reader_registry_unregister_is_idempotent():
    reg = ReaderRegistry()
    tok = reg.register(1)
    reg.unregister(tok)
    reg.unregister(tok)
    assert reg.active_count() == 0
