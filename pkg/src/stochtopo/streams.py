"""Reproducible random-number substreams.

Every stochastic component draws from a :class:`RandomStream`, a value
object identifying one purpose-scoped substream of the master seed.  The
same ``(seed, stream_id)`` pair always produces the same draw sequence,
regardless of which thread or process consumes it, so parallel catalog
builds and layout evaluations are schedule independent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Reserved stream_id blocks.  Child ids are allocated as BASE + index, so
# each block supports up to _BLOCK entries before colliding with the next.
_BLOCK = 1 << 20
CATALOG_BLOCK = 1 * _BLOCK
LAYOUT_BLOCK = 2 * _BLOCK
MC_BLOCK = 3 * _BLOCK
USER_BLOCK = 4 * _BLOCK


@dataclass(frozen=True)
class RandomStream:
    """A named, reproducible substream of the global seed.

    Parameters
    ----------
    seed : int
        Master seed (64-bit).
    stream_id : int
        Purpose-scoped substream index; 0 is the root stream.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at draw index 0 of this substream."""
        return np.random.default_rng([self.seed, self.stream_id])

    def child(self, index: int) -> "RandomStream":
        """Substream ``index`` within this stream's id block."""
        if index < 0 or index >= _BLOCK:
            raise ValueError(f"child index {index} outside block [0, {_BLOCK})")
        return RandomStream(self.seed, self.stream_id + index)
