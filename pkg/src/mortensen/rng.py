"""Counter-based random streams.

Every stochastic routine takes an integer seed and an optional stream
index and maps them to an independent Philox stream.  Philox is a
counter-based generator, so stream (seed, i) is the same whether it is
created first, last, or concurrently with any other stream; parallel and
serial runs therefore agree bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator keyed by (seed, index)."""
    key = np.array([int(seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
