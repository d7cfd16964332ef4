"""Deterministic random streams for scenario runs.

Everything random in a scenario derives from one 64-bit seed through
splitmix64, a fixed-increment Weyl sequence passed through a two-round
xor-shift-multiply finisher.  The generator is chosen for being easy to
restate in any language from its constants alone, so trial fields and
sampled parameter pairs can be reproduced outside this package:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)

Independent substreams come from hashing a textual tag into the parent
seed, so the order in which measurements consume randomness never
matters.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _fnv1a(text: str) -> int:
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK
    return h


class SplitMix64:
    """Stream of 64-bit words from one seed; see the module docstring."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self.state = self.seed
        self._spare: float | None = None

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        """Standard normal by Box-Muller on consecutive uniforms."""
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u = 1.0 - self.uniform()  # leave 0 out of the log
        v = self.uniform()
        r = math.sqrt(-2.0 * math.log(u))
        self._spare = r * math.sin(2.0 * math.pi * v)
        return r * math.cos(2.0 * math.pi * v)

    def substream(self, tag: str) -> "SplitMix64":
        """Independent child stream named by a tag.  Children derive from
        the construction seed, not the running state, so what one
        measurement consumed can never shift another's draw."""
        return SplitMix64(_mix((self.seed ^ _fnv1a(tag)) & _MASK))
