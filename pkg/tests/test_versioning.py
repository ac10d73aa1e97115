"""Visibility rules for both version flavors, straight from their
definitions: chains answer with the newest committed record at or below
the query time, intervals with a half-open [begin, end) window."""

import pytest
from hypothesis import given, strategies as st

from dgsbench.versioning import (
    CHAIN_ENTRY_WORDS,
    CHAIN_EXTRA_VERSION_WORDS,
    COW_ELEMENT_WORDS,
    INF_TS,
    INTERVAL_ENTRY_WORDS,
    RAW_ENTRY_WORDS,
    ChainVersion,
    IntervalVersion,
    chain_compact,
    chain_length,
    chain_visible,
    interval_dead,
    interval_visible,
    pack_stamp,
    stamp_is_delete,
    stamp_ts,
)


def chain(*records):
    """Build newest-first from (ts, is_delete) pairs given newest first."""
    head = None
    for ts, is_del in reversed(records):
        head = ChainVersion(ts, is_del, head)
    return head


class TestChainVisibility:
    def test_delete_over_insert_mid_window(self):
        # delete@9 over insert@5: a reader at 7 still sees the insert
        head = chain((9, True), (5, False))
        assert chain_visible(head, 7) is True

    def test_delete_over_insert_after_delete(self):
        head = chain((9, True), (5, False))
        assert chain_visible(head, 10) is False

    def test_empty_chain_absent(self):
        assert chain_visible(None, 100) is False

    def test_before_first_version_absent(self):
        assert chain_visible(chain((5, False)), 4) is False

    def test_boundary_inclusive(self):
        assert chain_visible(chain((5, False)), 5) is True

    def test_provisional_records_invisible(self):
        head = ChainVersion(None, False, chain((3, True), (1, False)))
        assert chain_visible(head, 10) is False  # newest committed is a delete
        assert chain_visible(head, 2) is True


class TestIntervalVisibility:
    def test_lower_bound_inclusive(self):
        assert interval_visible(IntervalVersion(1, 3, 8), 3) is True

    def test_upper_bound_exclusive(self):
        assert interval_visible(IntervalVersion(1, 3, 8), 8) is False

    def test_live_interval_far_future(self):
        assert interval_visible(IntervalVersion(1, 3, INF_TS), 10**6) is True

    def test_provisional_begin_invisible(self):
        assert interval_visible(IntervalVersion(1, None, INF_TS), 10**6) is False

    def test_dead_only_when_closed_at_or_below_watermark(self):
        assert interval_dead(IntervalVersion(1, 3, 8), 9) is True
        assert interval_dead(IntervalVersion(1, 3, 8), 7) is False
        assert interval_dead(IntervalVersion(1, 3, INF_TS), 10**9) is False


class TestChainCompaction:
    def test_unlinks_below_anchor(self):
        head = chain((9, False), (5, False))
        new_head, reclaimed = chain_compact(head, 10)
        assert reclaimed == 1
        assert chain_length(new_head) == 1
        assert chain_visible(new_head, 10) is True

    def test_watermark_zero_reclaims_nothing(self):
        head = chain((9, False), (5, False))
        _, reclaimed = chain_compact(head, 0)
        assert reclaimed == 0

    def test_visibility_preserved_at_and_above_watermark(self):
        head = chain((9, True), (5, False), (2, False))
        compacted, _ = chain_compact(head, 6)
        for t in range(6, 12):
            assert chain_visible(compacted, t) == chain_visible(head, t)


class TestStampPacking:
    def test_roundtrip(self):
        s = pack_stamp(41, True)
        assert stamp_ts(s) == 41
        assert stamp_is_delete(s) is True
        s2 = pack_stamp(41, False)
        assert stamp_ts(s2) == 41
        assert stamp_is_delete(s2) is False

    def test_kind_lives_in_high_bit(self):
        assert pack_stamp(7, True) == 7 | (1 << 63)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            pack_stamp(1 << 63, False)
        with pytest.raises(ValueError):
            pack_stamp(-1, False)


def test_word_model_constants():
    assert CHAIN_ENTRY_WORDS == 3
    assert INTERVAL_ENTRY_WORDS == 3
    assert CHAIN_EXTRA_VERSION_WORDS == 2
    assert RAW_ENTRY_WORDS == 1
    assert COW_ELEMENT_WORDS == 1


@given(
    ops=st.lists(st.booleans(), min_size=1, max_size=12),
    t_q=st.integers(min_value=0, max_value=14),
)
def test_chain_matches_replay(ops, t_q):
    """Chain visibility equals replaying committed ops in timestamp order."""
    records = [(ts, is_del) for ts, is_del in enumerate(ops, start=1)]
    head = chain(*reversed(records))
    expected = False
    for ts, is_del in records:
        if ts <= t_q:
            expected = not is_del
    assert chain_visible(head, t_q) == expected


@given(
    ops=st.lists(st.booleans(), min_size=1, max_size=12),
    wm=st.integers(min_value=0, max_value=14),
)
def test_chain_compact_never_changes_future_reads(ops, wm):
    records = [(ts, is_del) for ts, is_del in enumerate(ops, start=1)]
    head = chain(*reversed(records))
    compacted, reclaimed = chain_compact(head, wm)
    assert reclaimed >= 0
    for t in range(wm, len(ops) + 2):
        assert chain_visible(compacted, t) == chain_visible(
            chain(*reversed(records)), t
        )
