"""Per-element version metadata and the visibility rule shared by all readers.

Two flavors are supported:

* chain versions: each stored neighbor key carries a newest-first linked
  list of (timestamp, operation) records.  A reader at time t sees the key
  iff the newest committed record with ts <= t is an insert.
* interval versions: each physical array element is one version window
  [begin, end).  A reader at time t sees the element iff begin <= t < end.

In the machine-word footprint model one word holds both the timestamp and
the operation kind: the kind lives in the high bit (``pack_stamp``).  The
Python objects keep the fields separate for clarity; accounting uses the
packed model.

Provisional versions (written inside an uncommitted transaction) have
``ts``/``begin`` set to None and are invisible to every reader.  Commit
stamps them with the commit timestamp; abort unlinks them.
"""

from __future__ import annotations

WORD_BYTES = 8

# end-timestamp sentinel for a live interval version
INF_TS = (1 << 62) - 1

# end-timestamp marker for an interval closed by a still-uncommitted txn;
# compares below every valid timestamp so the entry is invisible until the
# commit rewrites it
PENDING_END = -1

_DELETE_BIT = 1 << 63
_TS_MASK = _DELETE_BIT - 1

# footprint model, in machine words
CHAIN_ENTRY_WORDS = 3        # key + packed stamp + chain link
CHAIN_EXTRA_VERSION_WORDS = 2  # packed stamp + link per additional record
INTERVAL_ENTRY_WORDS = 3     # key + begin + end
RAW_ENTRY_WORDS = 1          # key only, no version metadata
COW_ELEMENT_WORDS = 1        # key only, snapshots version whole structures


def pack_stamp(ts: int, is_delete: bool) -> int:
    """Fold the operation kind into the timestamp's high bit."""
    if not 0 <= ts <= _TS_MASK:
        raise ValueError("timestamp out of range")
    return ts | _DELETE_BIT if is_delete else ts


def stamp_ts(stamp: int) -> int:
    return stamp & _TS_MASK


def stamp_is_delete(stamp: int) -> bool:
    return bool(stamp & _DELETE_BIT)


class ChainVersion:
    """One record in a newest-first version chain."""

    __slots__ = ("ts", "is_delete", "prev")

    def __init__(self, ts: int | None, is_delete: bool, prev: "ChainVersion | None" = None):
        self.ts = ts
        self.is_delete = is_delete
        self.prev = prev

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = "D" if self.is_delete else "I"
        return f"<{kind}@{self.ts}>"


def chain_visible(head: ChainVersion | None, t_q: int | None) -> bool:
    """True iff the newest committed record with ts <= t_q is an insert.

    t_q None means current membership: the newest record decides, provisional
    ones included (only the lock holder can observe those).
    """
    if t_q is None:
        return head is not None and not head.is_delete
    v = head
    while v is not None:
        if v.ts is not None and v.ts <= t_q:
            return not v.is_delete
        v = v.prev
    return False


def chain_length(head: ChainVersion | None) -> int:
    n = 0
    v = head
    while v is not None:
        n += 1
        v = v.prev
    return n


def chain_compact(head: ChainVersion | None, watermark: int) -> tuple[ChainVersion | None, int]:
    """Unlink records strictly older than the newest one with ts <= watermark.

    Provisional records are treated as newer than any watermark.  Returns
    (new head, number of unlinked records).  Visibility at any t >= watermark
    is unchanged because the anchor record still answers those reads.
    """
    anchor = None
    v = head
    while v is not None:
        if v.ts is not None and v.ts <= watermark:
            anchor = v
            break
        v = v.prev
    if anchor is None:
        return head, 0
    reclaimed = chain_length(anchor.prev)
    anchor.prev = None
    return head, reclaimed


class IntervalVersion:
    """One interval-flavor version: visible while begin <= t < end."""

    __slots__ = ("key", "begin", "end")

    def __init__(self, key: int, begin: int | None, end: int):
        self.key = key
        self.begin = begin
        self.end = end

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        end = "INF" if self.end == INF_TS else self.end
        return f"<{self.key}:[{self.begin},{end})>"


def interval_visible(version: IntervalVersion, t_q: int | None) -> bool:
    if t_q is None:  # current membership: any still-open window counts
        return version.end == INF_TS
    b = version.begin
    return b is not None and b <= t_q < version.end


def interval_dead(version: IntervalVersion, watermark: int) -> bool:
    """True iff no reader at t >= watermark can ever see this version."""
    return version.begin is not None and version.end != PENDING_END and version.end <= watermark
