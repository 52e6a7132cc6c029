"""Counter-based uniform draws keyed by (seed, stream, channel).

Every draw is a pure function of its key and position, so replications can be
computed in any order or on any worker and still agree bit for bit.
"""

from __future__ import annotations

import numpy as np

_TWO_M53 = 2.0 ** -53


def _generator(seed: int, stream: int, channel: int) -> np.random.Philox:
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(int(stream), int(channel)))
    return np.random.Philox(ss)


def uniforms(seed: int, stream: int, n: int, channel: int = 0, offset: int = 0) -> np.ndarray:
    """Return ``n`` uniforms strictly inside (0, 1).

    ``offset`` skips the first ``offset`` positions of the stream; the value at
    position ``i`` never depends on how many values were requested.
    """
    if n < 0 or offset < 0:
        raise ValueError("n and offset must be nonnegative")
    bits = _generator(seed, stream, channel)
    if offset:
        # Philox emits four 64-bit words per counter step.
        steps, rem = divmod(offset, 4)
        bits.advance(steps)
        raw = bits.random_raw(n + rem)[rem:]
    else:
        raw = bits.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def uniform_matrix(seed: int, streams, n: int, channel: int = 0) -> np.ndarray:
    """Rows of ``n`` uniforms, one row per stream id in ``streams``."""
    streams = list(streams)
    out = np.empty((len(streams), n))
    for i, s in enumerate(streams):
        out[i] = uniforms(seed, s, n, channel)
    return out
