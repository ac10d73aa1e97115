"""Shared test drivers.

ContainerHarness runs committed transactions against a single neighbor
container while mirroring them into a plain history model, so visibility
at any timestamp can be recomputed independently of the container code.
"""

from __future__ import annotations

import pytest

from dgsbench.containers import ContainerConfig, make_container
from dgsbench.containers.base import MutationLog, OpCounters
from dgsbench.rng import SplitMix64

ALL_KINDS = ("unsorted", "sorted", "pma", "segsl", "cow")
CHAIN_KINDS = ("sorted", "pma", "segsl")


def make_cfg(**kw) -> ContainerConfig:
    kw.setdefault("counters", OpCounters())
    return ContainerConfig(**kw)


class ContainerHarness:
    """Commit/abort driver plus an order-aware reference model."""

    def __init__(self, kind: str, **cfg_kwargs):
        self.cfg = make_cfg(**cfg_kwargs)
        self.c = make_container(kind, self.cfg)
        self.kind = kind
        self.ts = 0
        # key -> [(ts, seq, is_delete)] committed ops in order
        self.history: dict[int, list[tuple[int, int, bool]]] = {}

    def commit(self, ops) -> int:
        """ops: [(key, is_delete)] applied as one transaction."""
        log = MutationLog()
        for key, is_del in ops:
            self.c.mutate(key, is_del, log)
        self.ts += 1
        log.stamp(self.ts)
        for seq, (key, is_del) in enumerate(ops):
            self.history.setdefault(key, []).append((self.ts, seq, is_del))
        return self.ts

    def abort(self, ops) -> None:
        log = MutationLog()
        for key, is_del in ops:
            self.c.mutate(key, is_del, log)
        log.undo()

    # -- model-side visibility ------------------------------------------------

    def visible_at(self, ts: int) -> set[int]:
        out = set()
        for key, h in self.history.items():
            last = None
            for t, _seq, is_del in h:
                if t <= ts:
                    last = is_del
            if last is False:
                out.add(key)
        return out

    def expected_scan(self, ts: int) -> list[int]:
        vis = self.visible_at(ts)
        if self.kind != "unsorted":
            return sorted(vis)
        # newest-to-oldest by each key's last committed insert event
        def last_insert(key: int):
            ev = None
            for t, seq, is_del in self.history[key]:
                if t <= ts and not is_del:
                    ev = (t, seq)
            return ev

        return sorted(vis, key=last_insert, reverse=True)


def rand_ops(seed: int, n: int, key_space: int, p_del_pct: int = 35):
    """Deterministic (key, is_delete) stream."""
    rng = SplitMix64(seed)
    return [
        (rng.randbelow(key_space), rng.randbelow(100) < p_del_pct)
        for _ in range(n)
    ]


@pytest.fixture
def rng():
    return SplitMix64(0xA5A5)
