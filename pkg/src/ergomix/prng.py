"""SplitMix64 with rejection sampling, bit-exact across platforms.

Output k of a generator seeded with x0 depends only on x0 + k*GAMMA, so
long runs are produced in numpy blocks; the scalar path is kept as the
reference the block path is tested against.
"""
from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stage_seed(master_seed: int, stage: int) -> int:
    """Seed for the stochastic stream of a given stage index."""
    return (master_seed ^ (stage * GAMMA)) & MASK64


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def block(self, n: int) -> np.ndarray:
        """Next n raw outputs as uint64, advancing the state by n steps."""
        k = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + k * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z ^= z >> np.uint64(31)
        self.state = (self.state + n * GAMMA) & MASK64
        return z

    def uniform(self, H: int) -> int:
        """One draw uniform on {0, ..., H}."""
        m = H + 1
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            z = self.next_u64()
            if z < limit:
                return z % m

    def uniform_array(self, H: int, n: int) -> np.ndarray:
        """n draws uniform on {0, ..., H}; same stream as n calls to uniform()."""
        m = H + 1
        limit = (1 << 64) - ((1 << 64) % m)
        if limit == 1 << 64:
            # m is a power of two (or 1): nothing is ever rejected
            return (self.block(n) % np.uint64(m)).astype(np.int64)
        out = np.empty(0, dtype=np.uint64)
        while out.size < n:
            need = n - out.size
            z = self.block(need)
            keep = z[z < np.uint64(limit)]
            out = np.concatenate([out, keep])
        return (out % np.uint64(m)).astype(np.int64)
