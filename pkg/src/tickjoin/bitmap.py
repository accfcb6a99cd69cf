"""Per-cell containment bitmaps: interlaced generation, linearization, counts.

One bitmap per active cell encodes every (intersecting subquery, object)
containment outcome.  Words are 32 bits; bit k of the word for
(subquery s, object block b) is the outcome for object b*32+k.  The
interlaced layout stores the words of one object block for all subqueries
consecutively (offset b*n_queries + s); linearization transposes word-wise so
each subquery's words are contiguous (offset s*n_blocks + b).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CountMismatch

WORD_BITS = 32  # w
SZ_WARP = 32  # lane-group width used by the emulated flush/transpose order


def n_blocks(n_objects: int) -> int:
    return -(n_objects // -WORD_BITS)


@dataclass
class InterlacedBitmap:
    cell_id: int
    n_queries: int
    n_objects: int
    words: np.ndarray  # uint32, length n_queries * n_blocks, block-major

    @property
    def n_blocks(self) -> int:
        return n_blocks(self.n_objects)

    def bit(self, subquery: int, obj: int) -> bool:
        word = self.words[(obj // WORD_BITS) * self.n_queries + subquery]
        return bool((int(word) >> (obj % WORD_BITS)) & 1)


@dataclass
class LinearBitmap:
    cell_id: int
    n_queries: int
    n_objects: int
    words: np.ndarray  # uint32, length n_queries * n_blocks, subquery-major

    @property
    def n_blocks(self) -> int:
        return n_blocks(self.n_objects)

    def bit(self, subquery: int, obj: int) -> bool:
        word = self.words[subquery * self.n_blocks + obj // WORD_BITS]
        return bool((int(word) >> (obj % WORD_BITS)) & 1)


@dataclass
class ResultCounts:
    counts: np.ndarray  # positives per subquery
    offsets: np.ndarray  # exclusive prefix sum of counts

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def generate_interlaced(
    cell_id: int,
    obj_xs: np.ndarray,
    obj_ys: np.ndarray,
    sq_xa: np.ndarray,
    sq_ya: np.ndarray,
    sq_xb: np.ndarray,
    sq_yb: np.ndarray,
    out: Optional[np.ndarray] = None,
) -> InterlacedBitmap:
    """Evaluate all containment tests of one cell into an interlaced bitmap.

    Object order is the directory block order; padding bits past the last
    object are zero.  `out`, when given, is the cell's word slice of a
    per-tick arena.
    """
    nq = len(sq_xa)
    no = len(obj_xs)
    blocks = n_blocks(no)
    inside = (
        (obj_xs >= sq_xa[:, None])
        & (obj_xs <= sq_xb[:, None])
        & (obj_ys >= sq_ya[:, None])
        & (obj_ys <= sq_yb[:, None])
    )
    padded = np.zeros((nq, blocks * WORD_BITS), dtype=bool)
    padded[:, :no] = inside
    words = np.packbits(padded, axis=1, bitorder="little").view("<u4")  # (nq, blocks)
    interlaced = np.ascontiguousarray(words.T).reshape(-1)
    if out is not None:
        out[:] = interlaced
        interlaced = out
    return InterlacedBitmap(cell_id, nq, no, interlaced)


def linearize(b: InterlacedBitmap, out: Optional[np.ndarray] = None) -> LinearBitmap:
    """Word-wise transpose: linear[s*blocks + j] == interlaced[j*n_queries + s]."""
    words = np.ascontiguousarray(b.words.reshape(b.n_blocks, b.n_queries).T).reshape(-1)
    if out is not None:
        out[:] = words
        words = out
    return LinearBitmap(b.cell_id, b.n_queries, b.n_objects, words)


def count_results(b: LinearBitmap) -> ResultCounts:
    """Popcount per subquery plus the exclusive prefix sum of the counts."""
    per_word = np.bitwise_count(b.words.reshape(b.n_queries, b.n_blocks))
    counts = per_word.sum(axis=1, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    return ResultCounts(counts, offsets)


def decode_positions(b: LinearBitmap, expected: Optional[ResultCounts] = None):
    """Set-bit positions per subquery, ascending, as (rows, object positions).

    Raises CountMismatch when `expected` disagrees with the actual popcounts.
    """
    words = b.words.reshape(b.n_queries, b.n_blocks)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")[:, : b.n_objects]
    rows, cols = np.nonzero(bits)
    counts = np.bincount(rows, minlength=b.n_queries).astype(np.int64)
    if expected is not None and not np.array_equal(counts, expected.counts):
        raise CountMismatch(f"decode of cell {b.cell_id} disagrees with filtering counts")
    return rows, cols, counts
