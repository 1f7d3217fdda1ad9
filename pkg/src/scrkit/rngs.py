"""Deterministic random-number streams.

Every simulation in this package draws from counter-based Philox streams.
Work is split into fixed-size blocks, each block owning a disjoint section
of the counter space, so results depend only on (seed, block index) and
never on scheduling or thread count.
"""

from __future__ import annotations

import numpy as np

# Each substream gets its own high-order counter word; a block would need to
# draw 2**128 values before it could collide with its neighbour.
_SUBSTREAM_STRIDE = 1 << 128


def substream(seed: int, index: int) -> np.random.Generator:
    """Return the generator for substream ``index`` of the stream keyed by ``seed``.

    Substreams are non-overlapping, so drawing from substreams 0..k in any
    order (or concurrently) always yields the same numbers per substream.
    """
    if index < 0:
        raise ValueError("substream index must be nonnegative")
    bitgen = np.random.Philox(key=seed, counter=index * _SUBSTREAM_STRIDE)
    return np.random.Generator(bitgen)
