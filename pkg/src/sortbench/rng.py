"""Portable seeded generator used by every randomized workload and strategy.

The algorithm is fixed so that streams are reproducible across platforms
and implementations:

* the 64-bit seed is expanded with one SplitMix64 step into the state
  (a zero state is replaced by ``0x9E3779B97F4A7C15``);
* each draw is xorshift64* (shifts 12, 25, 27; multiplier
  ``0x2545F4914F6CDD1D``);
* a float in ``[0, 1)`` is the top 53 bits of a draw times ``2**-53``.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_XS_MULT = 0x2545F4914F6CDD1D

VERSION = "xorshift64star-splitmix64-v1"


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        state = splitmix64(seed & MASK64)
        self.state = state or _GOLDEN

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * _XS_MULT) & MASK64

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        bits = n.bit_length()
        while True:
            r = self.next_u64() >> (64 - bits)
            if r < n:
                return r
