"""Portable seeded generator used for every random draw in the package.

numpy's generators are avoided on purpose: their streams are not pinned across
versions, and byte-identical CLI outputs need a fixed algorithm.
"""

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 generator.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed=0):
        self.state = int(seed) & _MASK64

    def __repr__(self):
        return f"SplitMix64(state={self.state:#018x})"

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self):
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo, hi):
        if lo > hi:
            raise ValueError(f"invalid range: lo={lo} > hi={hi}")
        return lo + (hi - lo) * self.random()

    def randbelow(self, n):
        """Integer in [0, n) via a 64x64 -> 128 bit multiply (one draw)."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return (self.next_u64() * n) >> 64

    def permutation(self, n):
        """Fisher-Yates shuffle of ``range(n)``."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm


def check_rng(rng):
    """Accept a ``SplitMix64`` or an integer seed."""
    if isinstance(rng, SplitMix64):
        return rng
    if rng is None:
        return SplitMix64(0)
    return SplitMix64(int(rng))
