"""Counter-based SplitMix64 generator.

The state after k draws is seed + k * GOLDEN (mod 2^64) and each output is
mix(state), so a stream is fully determined by (seed, index). Streams for
sub-tasks are derived with ``split``.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int, stream: int = 0):
        self.state = (seed + mix64((stream * GOLDEN) & MASK)) & MASK if stream else seed & MASK

    def next64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        return mix64(self.state)

    def randbelow(self, n: int) -> int:
        """Uniform in [0, n) by rejection on the top of the 64-bit range."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n > 1 << 64:
            raise ValueError("n must not exceed 2^64")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            r = self.next64()
            if r < limit:
                return r % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform in [lo, hi] inclusive."""
        return lo + self.randbelow(hi - lo + 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randbelow(len(seq))]

    def split(self, stream: int) -> SplitMix64:
        return SplitMix64(self.next64(), stream)
