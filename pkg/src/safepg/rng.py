"""Counter-based splitmix64 streams with a polar Box-Muller normal sampler.

The generator is deliberately simple so that other implementations can
reproduce it bit for bit: a 64-bit counter advanced by the golden-ratio
increment and passed through the splitmix64 finalizer.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 output finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class RngStream:
    """A single-owner random stream identified by ``(seed, stream_id)``.

    Stream 0 of a seed is plain splitmix64 seeded with ``seed``; other
    streams start from ``seed ^ mix64(stream_id)``.
    """

    __slots__ = ("seed", "stream_id", "state", "_cached_normal")

    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed <= MASK64 or not 0 <= stream_id <= MASK64:
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        self.state = (seed ^ mix64(stream_id)) & MASK64
        self._cached_normal: float | None = None

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        """Next double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def normal(self) -> float:
        """Standard normal deviate (polar Box-Muller, second deviate cached)."""
        if self._cached_normal is not None:
            z = self._cached_normal
            self._cached_normal = None
            return z
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        self._cached_normal = v * f
        return u * f

    def spawn(self, stream_id: int) -> "RngStream":
        """Independent stream sharing this stream's seed."""
        return RngStream(self.seed, stream_id)

    def snapshot(self) -> tuple:
        return (self.seed, self.stream_id, self.state, self._cached_normal)

    @classmethod
    def restore(cls, snap: tuple) -> "RngStream":
        seed, stream_id, state, cached = snap
        out = cls(seed, stream_id)
        out.state = state
        out._cached_normal = cached
        return out

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, state={self.state:#018x})"


def rng_uniform(stream: RngStream) -> float:
    return stream.uniform()


def rng_normal(stream: RngStream) -> float:
    return stream.normal()
