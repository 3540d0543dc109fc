"""Counter-based random streams.

Every round owns a fixed-width row of uniforms per protocol phase, addressed
by ``(seed, phase, round_index)`` on a Philox stream. Rows are produced by
jumping the counter, so any chunking of rounds across workers yields the same
numbers.
"""

import numpy as np

ROW_WIDTH = 16  # uniforms per round per phase; multiple of 4 (Philox block)

# stream identifiers
FORWARD = 1
CHECK = 2
BACKWARD = 3
SESSION = 4
DRIFT_FORWARD = 5
DRIFT_BACKWARD = 6


class StreamExhausted(RuntimeError):
    pass


class RowStream:
    """Hands out the uniforms of one round's row in order (``random()`` duck type)."""

    __slots__ = ("_row", "_pos")

    def __init__(self, row):
        self._row = row
        self._pos = 0

    def random(self):
        if self._pos >= self._row.shape[0]:
            raise StreamExhausted("round used more uniforms than its row holds")
        value = float(self._row[self._pos])
        self._pos += 1
        return value


def _bitgen(seed, stream):
    return np.random.Philox(key=[int(seed) & 0xFFFFFFFFFFFFFFFF, stream])


def round_rows(seed, stream, start, stop, width=ROW_WIDTH):
    """Uniform rows for rounds ``start..stop-1`` of ``stream``."""
    if width % 4:
        raise ValueError("row width must be a multiple of 4")
    bg = _bitgen(seed, stream)
    bg.advance(start * width // 4)
    return np.random.Generator(bg).random((stop - start, width))


def round_stream(seed, stream, index, width=ROW_WIDTH):
    return RowStream(round_rows(seed, stream, index, index + 1, width)[0])


def generator(seed, stream):
    """Plain sequential generator for session-level choices."""
    return np.random.Generator(_bitgen(seed, stream))


def sub_seed(seed, index):
    """Derived seed for the ``index``-th session of a sweep."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
