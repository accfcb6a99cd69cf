"""Uniform-grid index: materialization, object mapping, query splitting, sweep.

The grid is square (split_factor columns = rows) and cell ids are the Morton
codes of the (column, row) pair, so cell ordering preserves spatial locality
exactly like the quadtree path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import morton
from .directory import ObjectColumns, SubQueryColumns, sort_by_cell
from .errors import BadSplitFactor, OutOfBounds
from .geometry import Query, Rect, TickBatch, clip, compute_mbr, query_arrays

# interleave_arrays spreads 16-bit coordinates
MAX_SPLIT_FACTOR = 1 << 16

WORD_BITS = 32


@dataclass(frozen=True)
class GridSpec:
    mbr: Rect
    split_factor: int
    cell_w: float
    cell_h: float


def build_grid(mbr: Rect, split_factor: int) -> GridSpec:
    if not 1 <= split_factor <= MAX_SPLIT_FACTOR:
        raise BadSplitFactor(f"split factor must be in [1, {MAX_SPLIT_FACTOR}]: {split_factor}")
    return GridSpec(mbr, split_factor, mbr.width / split_factor, mbr.height / split_factor)


def _axis_cells(values: np.ndarray, origin: float, extent: float, n: int) -> np.ndarray:
    """floor((v - origin) / (extent / n)), clamped into [0, n-1]."""
    if extent > 0:
        return np.minimum((values - origin) * (n / extent), n - 1).astype(np.int64)
    return np.zeros(values.shape, dtype=np.int64)


def grid_coords(xs: np.ndarray, ys: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    i = _axis_cells(np.asarray(xs, dtype=np.float64), grid.mbr.xa, grid.mbr.width, grid.split_factor)
    j = _axis_cells(np.asarray(ys, dtype=np.float64), grid.mbr.ya, grid.mbr.height, grid.split_factor)
    return i, j


def map_objects(objects: Union[ObjectColumns, Sequence], grid: GridSpec) -> np.ndarray:
    """Cell id per object (function f of the mapping definitions)."""
    cols = objects if isinstance(objects, ObjectColumns) else ObjectColumns.from_objects(objects)
    m = grid.mbr
    if len(cols) and (
        np.any(cols.xs < m.xa)
        or np.any(cols.xs > m.xb)
        or np.any(cols.ys < m.ya)
        or np.any(cols.ys > m.yb)
    ):
        raise OutOfBounds("object outside the grid MBR")
    i, j = grid_coords(cols.xs, cols.ys, grid)
    return morton.interleave_arrays(i, j)


def split_queries(queries: Sequence[Query], grid: GridSpec) -> SubQueryColumns:
    """One subquery per (query, intersected cell) pair (function g).

    Queries must already be clipped to the grid MBR.  The output layout is the
    two-pass scheme: a counting pass, an exclusive prefix sum assigning each
    query its output slots, then the fill pass, all vectorized, so the layout
    is deterministic by construction.
    """
    if not queries:
        return SubQueryColumns.empty()
    qids, qxa, qya, qxb, qyb = query_arrays(queries)

    i0, j0 = grid_coords(qxa, qya, grid)
    i1, j1 = grid_coords(qxb, qyb, grid)
    per_query = (i1 - i0 + 1) * (j1 - j0 + 1)
    offsets = np.concatenate([[0], np.cumsum(per_query)[:-1]])
    total = int(per_query.sum())

    qidx = np.repeat(np.arange(len(queries)), per_query)
    pos = np.arange(total) - offsets[qidx]
    width = (i1 - i0 + 1)[qidx]
    ii = i0[qidx] + pos % width
    jj = j0[qidx] + pos // width
    cell_ids = morton.interleave_arrays(ii, jj)

    m = grid.mbr
    cxa = m.xa + ii * grid.cell_w
    cya = m.ya + jj * grid.cell_h
    # cells on the far border may overhang the MBR; objects cannot, so the
    # covering test only needs the cell's extent inside the MBR
    covering = (
        (qxa[qidx] <= cxa)
        & (qxb[qidx] >= np.minimum(cxa + grid.cell_w, m.xb))
        & (qya[qidx] <= cya)
        & (qyb[qidx] >= np.minimum(cya + grid.cell_h, m.yb))
    )
    return SubQueryColumns(
        query_ids=qids[qidx],
        cell_ids=cell_ids,
        covering=covering,
        xa=qxa[qidx],
        ya=qya[qidx],
        xb=qxb[qidx],
        yb=qyb[qidx],
    )


def clip_queries(queries: Sequence[Query], mbr: Rect) -> list[Query]:
    """Clip query rects to the MBR, dropping queries that fall entirely outside."""
    out = []
    for q in queries:
        c = clip(q.rect, mbr)
        if c is not None:
            out.append(Query(q.issuer_id, c))
    return out


def indexing_cost(directory) -> int:
    """Machine-independent pipeline work: containment tests plus bitmap bits.

    Containment tests follow the filtering complexity (per active cell,
    intersecting subqueries times objects); the bit term is the number of
    bitmap bits the decode phase scans (object blocks padded to whole words).
    """
    n_obj = directory.o_end - directory.o_start
    n_isq = directory.i_end - directory.i_start
    mask = (n_obj > 0) & (n_isq > 0)
    blocks = -(n_obj[mask] // -WORD_BITS)
    tests = int((n_isq[mask] * n_obj[mask]).sum())
    bits = int((n_isq[mask] * blocks * WORD_BITS).sum())
    return tests + bits


def sweep_costs(batch: TickBatch, candidates: Iterable[int]) -> list[tuple[int, int]]:
    """Pipeline cost of each candidate split factor on one batch."""
    mbr = compute_mbr(batch)
    cols = ObjectColumns.from_objects(batch.objects)
    clipped = clip_queries(batch.queries, mbr)
    costs = []
    for sf in candidates:
        grid = build_grid(mbr, sf)
        cell_ids = map_objects(cols, grid)
        subq = split_queries(clipped, grid)
        costs.append((sf, indexing_cost(sort_by_cell(cols, cell_ids, subq))))
    return costs


def sweep_split_factor(batch: TickBatch, candidates: Iterable[int]) -> int:
    """Candidate minimizing the measured pipeline work; ties go to the smaller."""
    candidates = sorted(set(candidates))
    if not candidates:
        raise BadSplitFactor("empty candidate range")
    costs = sweep_costs(batch, candidates)
    best_sf, best_cost = costs[0]
    for sf, cost in costs[1:]:
        if cost < best_cost:
            best_sf, best_cost = sf, cost
    return best_sf
