"""Membership filter attached to unsorted neighbor arrays.

Sized at 1/16 of the array capacity (in bytes, one byte per 16 slots,
rounded up) with two multiplicative hash functions.  False positives are
expected once the filter saturates; false negatives never happen, which is
what lets a negative probe skip the array scan entirely.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_H1 = 0x9E3779B97F4A7C15
_H2 = 0xC2B2AE3D27D4EB4F


class BloomFilter:
    __slots__ = ("nbits", "nbytes", "_bits")

    def __init__(self, capacity: int, ratio: float = 1 / 16):
        nbytes = max(1, math.ceil(capacity * ratio))
        self.nbytes = nbytes
        self.nbits = nbytes * 8
        self._bits = bytearray(nbytes)

    def _positions(self, key: int) -> tuple[int, int]:
        a = ((key * _H1) & _MASK) >> 32
        b = ((key * _H2) & _MASK) >> 32
        return a % self.nbits, b % self.nbits

    def add(self, key: int) -> None:
        for pos in self._positions(key):
            self._bits[pos >> 3] |= 1 << (pos & 7)

    def might_contain(self, key: int) -> bool:
        for pos in self._positions(key):
            if not self._bits[pos >> 3] & (1 << (pos & 7)):
                return False
        return True

    @classmethod
    def rebuilt(cls, capacity: int, keys, ratio: float = 1 / 16) -> "BloomFilter":
        f = cls(capacity, ratio)
        for k in keys:
            f.add(k)
        return f
