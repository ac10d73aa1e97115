"""Interchangeable per-vertex neighbor containers.

Five families share one mutation/read interface so the graph layer and the
benchmark harness never special-case storage:

- ``unsorted``: append-only array of versioned entries, membership gated
  by a per-vertex bloom filter, scans newest to oldest.
- ``sorted``: sorted dynamic array of keys with per-key version chains.
- ``pma``: packed memory array keeping keys sorted with bounded gaps.
- ``segsl``: segmented skip list over key blocks, with an adaptive
  sorted-array mode for small sets.
- ``cow``: copy-on-write segmented tree of delta-encoded blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from .base import OpCounters
from .cow_tree import CowRootContainer
from .pma import PackedMemoryArray
from .segmented_skiplist import AdaptiveNeighborIndex, SegmentedSkipList
from .sorted_array import SortedNeighborArray
from .unsorted_array import UnsortedNeighborArray

CONTAINER_KINDS = ("unsorted", "sorted", "pma", "segsl", "cow")


@dataclass
class ContainerConfig:
    """Knobs shared by all container families."""

    block_size: int = 256
    adaptive: bool = True
    adaptive_threshold: int = 256
    bloom_ratio: float = 1.0 / 16.0
    versioned: bool = True
    encode_blocks: bool = True
    seed: int = 0
    counters: OpCounters = field(default_factory=OpCounters)


def make_container(kind: str, cfg: ContainerConfig):
    if kind == "unsorted":
        return UnsortedNeighborArray(cfg)
    if kind == "sorted":
        return SortedNeighborArray(cfg)
    if kind == "pma":
        return PackedMemoryArray(cfg)
    if kind == "segsl":
        if cfg.adaptive:
            return AdaptiveNeighborIndex(cfg)
        return SegmentedSkipList(cfg)
    if kind == "cow":
        return CowRootContainer(cfg)
    raise ConfigError(f"unknown container kind: {kind!r}")


__all__ = [
    "CONTAINER_KINDS",
    "ContainerConfig",
    "OpCounters",
    "make_container",
]
