"""Portable seeded random stream.

All in-game randomness flows through SplitMix64 streams so that a match is
bit-reproducible from its seed on any platform.  Streams are derived, never
shared: the environment and each agent slot get independent streams mixed
from (match seed, salt), which keeps entity randomness independent of the
order controllers are polled in.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, salt) -> int:
    """Mix a parent seed with a salt (int or str) into a child seed."""
    if isinstance(salt, str):
        h = 0xCBF29CE484222325
        for b in salt.encode("utf-8"):
            h = ((h ^ b) * 0x100000001B3) & _MASK
        salt = h
    return _mix((seed ^ ((salt * _GAMMA) & _MASK)) & _MASK)


class Stream:
    """SplitMix64 sequence with the handful of draws the games need."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq):
        if not seq:
            raise IndexError("choice from empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq, k: int) -> list:
        pool = list(seq)
        if k > len(pool):
            raise ValueError("sample larger than population")
        self.shuffle(pool)
        return pool[:k]
