"""Reference implementation of the simulator's random stream.

The stream is pinned: xoshiro256++ for output, with the four state words
expanded from a 64-bit seed by splitmix64. Replication k of a run seeded
with s uses stream seed (s + k) mod 2^64. Uniform doubles take the top 53
bits. Both simulation kernels (compiled and pure Python) implement exactly
these integer operations, so trajectories are bit-identical across
backends; this module is the readable specification and is what tests
compare the kernels against. Changing the algorithm would silently change
every seeded result, so don't.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_INV53 = 1.0 / (1 << 53)


def seed_state(seed: int) -> list[int]:
    """Expand a 64-bit seed into the four xoshiro256++ state words."""
    state = seed & _MASK
    words = []
    for _ in range(4):
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        words.append(z ^ (z >> 31))
    if not any(words):
        words[0] = 1  # the all-zero state is a fixed point; never use it
    return words


class Xoshiro256pp:
    """xoshiro256++ with splitmix64 seeding; 64-bit outputs."""

    def __init__(self, seed: int) -> None:
        self._s = seed_state(seed)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s0 + s3) & _MASK
        result = (((x << 23) | (x >> 41)) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self._s = [s0, s1, s2, s3]
        return result

    def next_double(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * _INV53
