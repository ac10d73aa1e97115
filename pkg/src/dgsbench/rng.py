"""Deterministic 64-bit counter generator used by every randomized component.

The generator is SplitMix64: state advances by a fixed odd increment per
draw and the output is a finalizing bit mix of the new state.  It is fully
specified here so replays match across machines and implementations:

    state  <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z      <- state
    z      <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9  mod 2^64
    z      <- (z xor (z >> 27)) * 0x94D049BB133111EB  mod 2^64
    output <- z xor (z >> 31)

Bounded draws use rejection sampling (no modulo bias), shuffles are
Fisher-Yates from the top index down, and sampling without replacement is
a partial Fisher-Yates over an index array.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform draw from [0, n)."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        limit = (_MASK + 1) - ((_MASK + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), in selection order."""
        if k > n:
            raise ValueError("sample larger than population")
        idx = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]

    def coin_run_level(self, max_level: int) -> int:
        """1 + length of the leading run of set bits in one draw, capped.

        Geometric with p = 1/2; used for skip list tower heights.
        """
        bits = self.next_u64()
        level = 1
        while level < max_level and bits & 1:
            bits >>= 1
            level += 1
        return level
