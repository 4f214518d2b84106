"""SplitMix64 stream with Box-Muller normals.

Chosen over numpy's generators so a trace can be regenerated bit-exactly
from the seed in any language:

* state advances by 0x9E3779B97F4A7C15 (mod 2**64) per draw;
* output mix: z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31 (all mod 2**64);
* uniform in [0, 1): (z >> 11) * 2**-53;
* normal: u1 = 1 - uniform(), u2 = uniform(),
  sqrt(-2 ln u1) * cos(2 pi u2). Each normal consumes two draws; the sine
  branch is discarded.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
