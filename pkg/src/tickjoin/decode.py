"""Bitmap decoding, covering-subquery expansion, and result merging.

Decoding turns each linearized bitmap into per-subquery object-id lists,
written at the offsets precomputed from the filtering-phase popcounts, so the
output is identical however the cell tasks are chunked or scheduled.
Covering subqueries never touch bitmaps: their lists are copies of the cell's
object-id block.  Merging concatenates per original query and sorts, making
the final ResultSet deterministic and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bitmap import LinearBitmap, ResultCounts, decode_positions
from .directory import CellDirectory
from .errors import DuplicateResult


@dataclass
class ResultSet:
    """Final per-query results: issuer id -> ascending object ids."""

    by_query: dict[int, list[int]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.by_query.values())

    def lines(self) -> list[str]:
        return [
            f"{qid}: {','.join(str(i) for i in ids)}".rstrip()
            for qid, ids in sorted(self.by_query.items())
        ]


def decode_cell(
    bitmap: LinearBitmap, counts: ResultCounts, block_obj_ids: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Object ids of every set bit, plus the per-subquery count vector.

    Ids come out grouped by subquery, each group in ascending object-block
    order; group k starts at counts.offsets[k].
    """
    _, cols, found = decode_positions(bitmap, expected=counts)
    return block_obj_ids[cols], found


def chunk_ranges(n_tasks: int, chunk_size: int) -> list[range]:
    """Partition task indices into contiguous chunks of at most chunk_size."""
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1: {chunk_size}")
    return [range(s, min(s + chunk_size, n_tasks)) for s in range(0, n_tasks, chunk_size)]


def decode_bitmaps(
    bitmaps: list[LinearBitmap],
    counts: list[ResultCounts],
    directory: CellDirectory,
    chunk_size: int = 64,
) -> list[tuple[int, np.ndarray]]:
    """Decode every cell bitmap, chunk by chunk, into (query_id, ids) lists.

    Chunking only batches the work (it models overlapping decode with result
    transfer); the output is independent of the chunk size.
    """
    out: list[tuple[int, np.ndarray]] = []
    for chunk in chunk_ranges(len(bitmaps), chunk_size):
        for t in chunk:
            b = bitmaps[t]
            row = directory.cell_row(b.cell_id)
            block_ids = directory.obj_ids[directory.o_start[row] : directory.o_end[row]]
            qids = directory.isq.query_ids[directory.i_start[row] : directory.i_end[row]]
            ids, found = decode_cell(b, counts[t], block_ids)
            bounds = np.concatenate([[0], np.cumsum(found)])
            out.extend((int(qids[s]), ids[bounds[s] : bounds[s + 1]]) for s in range(b.n_queries))
    return out


def expand_covering(directory: CellDirectory) -> list[tuple[int, np.ndarray]]:
    """(query_id, object ids) for every covering subquery: the whole cell block.

    Covering subqueries over cells without objects contribute empty lists
    and are skipped.
    """
    cov = directory.cov
    if len(cov) == 0:
        return []
    rows = np.searchsorted(directory.cell_ids, cov.cell_ids)
    out = []
    for k in range(len(cov)):
        r = rows[k]
        s, e = directory.o_start[r], directory.o_end[r]
        if e > s:
            out.append((int(cov.query_ids[k]), directory.obj_ids[s:e]))
    return out


def merge_results(
    chunks: Iterable[tuple[int, np.ndarray]], issued_query_ids: Iterable[int]
) -> ResultSet:
    """Concatenate per-query id lists, sort, and check pairwise disjointness.

    Every issued query appears in the output, with an empty list when nothing
    matched.  A repeated (query, object) pair means two subqueries produced
    the same result, which the space partition rules out: DuplicateResult.
    """
    acc: dict[int, list[np.ndarray]] = {}
    for qid, ids in chunks:
        if len(ids):
            acc.setdefault(qid, []).append(np.asarray(ids))
    out: dict[int, list[int]] = {int(q): [] for q in issued_query_ids}
    for qid, parts in acc.items():
        ids = np.sort(np.concatenate(parts))
        if len(ids) > 1 and np.any(ids[1:] == ids[:-1]):
            raise DuplicateResult(f"query {qid} received a result from two subqueries")
        if qid not in out:
            raise DuplicateResult(f"results for a query that was never issued: {qid}")
        out[qid] = ids.tolist()
    return ResultSet(out)
