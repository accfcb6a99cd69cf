"""PR-quadtree index: level-wise bulk construction, z_map lookups, splitting.

Construction mirrors the data-parallel scheme: Morton codes at the deepest
possible level are computed and sorted once, after which every level of the
tree is derived by locating quadrant intervals inside the sorted code vector.
Leaf lookups never traverse the tree; a flat table (`zmap`) maps every
deepest-level cell to the leaf containing it.

A leaf is identified by its (level, z) pair packed into one integer,
level in the high bits, so packed ids order lexicographically by (level, z).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import morton
from .directory import ObjectColumns, SubQueryColumns
from .errors import OutOfBounds, TilingGap
from .geometry import Query, Rect, query_arrays


@dataclass(frozen=True)
class QuadrantInterval:
    """One quadrant's slice of the Morton-sorted object vector."""

    level: int
    z: int
    start: int
    end: int
    split: bool

    @property
    def count(self) -> int:
        return self.end - self.start


@dataclass
class QuadIndex:
    mbr: Rect
    th_quad: int
    l_max: int
    l_deep: int
    leaves: np.ndarray  # packed ids, ascending
    zmap: np.ndarray  # 4**l_deep entries mapping deepest cells to packed leaf ids
    trace: Optional[list[list[QuadrantInterval]]] = None

    def pack(self, level: int, z) -> int:
        return (level << (2 * self.l_max)) | z

    def unpack(self, packed):
        return packed >> (2 * self.l_max), packed & ((1 << (2 * self.l_max)) - 1)

    def leaf_rect(self, packed: int) -> Rect:
        level, z = self.unpack(int(packed))
        i, j = morton.deinterleave_arrays(z)
        side = 1 << level
        w = self.mbr.width / side
        h = self.mbr.height / side
        return Rect(self.mbr.xa + i * w, self.mbr.ya + j * h, self.mbr.xa + (i + 1) * w, self.mbr.ya + (j + 1) * h)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)


def _object_columns(objects: Union[ObjectColumns, Sequence]) -> ObjectColumns:
    return objects if isinstance(objects, ObjectColumns) else ObjectColumns.from_objects(objects)


def build_quadtree(
    objects: Union[ObjectColumns, Sequence],
    th_quad: int,
    l_max: int,
    mbr: Rect,
    record_trace: bool = False,
) -> QuadIndex:
    """Level-wise bulk construction.

    Starting from the four level-1 quadrants, every quadrant holding more
    than th_quad objects is split at the next level; quadrants at l_max
    become leaves regardless of occupancy.  Quadrant intervals are located
    with binary searches over the sorted deepest-level codes, so each level
    costs O(pending quadrants * log |P|).
    """
    if th_quad < 1:
        raise ValueError(f"th_quad must be >= 1: {th_quad}")
    if not 1 <= l_max <= morton.L_MAX:
        raise ValueError(f"l_max must be in [1, {morton.L_MAX}]: {l_max}")
    cols = _object_columns(objects)
    i, j = morton.coords_for_points(cols.xs, cols.ys, mbr, l_max)
    z = morton.interleave_arrays(i, j)
    z_sorted = np.sort(z, kind="stable")
    n = len(z_sorted)

    shift_levels = 2 * l_max
    leaves: list[int] = []
    trace: list[list[QuadrantInterval]] = []
    # pending: (z of parent quadrant at level l-1, start, end)
    pending: list[tuple[int, int, int]] = [(0, 0, n)]
    l = 1
    l_deep = 1
    while pending and l <= l_max:
        shift = 2 * (l_max - l)
        level_trace: list[QuadrantInterval] = []
        next_pending: list[tuple[int, int, int]] = []
        for zp, s, e in pending:
            child_codes = z_sorted[s:e] >> shift
            bounds = s + np.searchsorted(child_codes, np.arange(4 * zp, 4 * zp + 5))
            for c in range(4):
                cz = 4 * zp + c
                cs, ce = int(bounds[c]), int(bounds[c + 1])
                split = (ce - cs > th_quad) and l < l_max
                if record_trace:
                    level_trace.append(QuadrantInterval(l, cz, cs, ce, split))
                if split:
                    next_pending.append((cz, cs, ce))
                else:
                    leaves.append((l << shift_levels) | cz)
        if record_trace:
            trace.append(level_trace)
        l_deep = l
        pending = next_pending
        l += 1

    leaf_arr = np.sort(np.asarray(leaves, dtype=np.int64))
    zmap = build_zmap(leaf_arr, l_deep, l_max)
    return QuadIndex(
        mbr=mbr,
        th_quad=th_quad,
        l_max=l_max,
        l_deep=l_deep,
        leaves=leaf_arr,
        zmap=zmap,
        trace=trace if record_trace else None,
    )


def build_zmap(leaves: np.ndarray, l_deep: int, l_max: int) -> np.ndarray:
    """Flat table mapping every deepest-level cell to its containing leaf.

    A leaf at level l covers 4**(l_deep - l) cells of the deepest grid, and
    those cells are contiguous in Morton order, so the table is a run-length
    expansion of the leaves sorted by their first deepest cell.
    """
    levels = leaves >> (2 * l_max)
    zs = leaves & ((1 << (2 * l_max)) - 1)
    spans = 4 ** (l_deep - levels)
    starts = zs * spans
    order = np.argsort(starts)
    starts, spans = starts[order], spans[order]
    expected = np.concatenate([[0], np.cumsum(spans)[:-1]])
    if len(leaves) == 0 or np.any(starts != expected) or int(spans.sum()) != 4**l_deep:
        raise TilingGap("leaves do not tile the deepest-level grid")
    return np.repeat(leaves[order], spans)


def map_objects_quad(objects: Union[ObjectColumns, Sequence], index: QuadIndex) -> np.ndarray:
    """Packed leaf id per object: deepest-level Morton code, then one zmap read."""
    cols = _object_columns(objects)
    i, j = morton.coords_for_points(cols.xs, cols.ys, index.mbr, index.l_deep)
    return index.zmap[morton.interleave_arrays(i, j)]


def split_queries_quad(queries: Sequence[Query], index: QuadIndex) -> SubQueryColumns:
    """One subquery per distinct leaf intersected by each (clipped) query.

    Works in integer deepest-cell space: each query's cell window is computed
    once, then the implicit quadtree is descended in z-order for all queries
    simultaneously, pruning quadrants outside the window and stopping at the
    quadrant that already lies inside a leaf.  Each intersected leaf is
    reached exactly once (at its minimal intersected deepest cell), so no
    duplicate (query, cell) pairs can be produced.
    """
    if not queries:
        return SubQueryColumns.empty()
    qids, qxa, qya, qxb, qyb = query_arrays(queries)
    mbr = index.mbr
    i0, j0 = morton.coords_for_points(qxa, qya, mbr, index.l_deep)
    i1, j1 = morton.coords_for_points(qxb, qyb, mbr, index.l_deep)

    level_shift = 2 * index.l_max
    z_mask = (1 << level_shift) - 1

    out_q: list[np.ndarray] = []
    out_leaf: list[np.ndarray] = []

    # frontier: query row index + quadrant code at the current level
    fq = np.arange(len(queries), dtype=np.int64)
    fz = np.zeros(len(queries), dtype=np.int64)
    for level in range(0, index.l_deep + 1):
        if len(fq) == 0:
            break
        span = 1 << (index.l_deep - level)
        fi, fj = morton.deinterleave_arrays(fz)
        ci0 = fi * span
        cj0 = fj * span
        hit = (ci0 <= i1[fq]) & (ci0 + span - 1 >= i0[fq]) & (cj0 <= j1[fq]) & (cj0 + span - 1 >= j0[fq])
        fq, fz, ci0, cj0 = fq[hit], fz[hit], ci0[hit], cj0[hit]

        leaf = index.zmap[fz << (2 * (index.l_deep - level))]
        is_leaf = (leaf >> level_shift) <= level
        if np.any(is_leaf):
            out_q.append(fq[is_leaf])
            out_leaf.append(leaf[is_leaf])
        fq, fz = fq[~is_leaf], fz[~is_leaf]
        fq = np.repeat(fq, 4)
        fz = (np.repeat(fz, 4) << 2) + np.tile(np.arange(4, dtype=np.int64), len(fz))

    sq_q = np.concatenate(out_q) if out_q else np.zeros(0, dtype=np.int64)
    sq_leaf = np.concatenate(out_leaf) if out_leaf else np.zeros(0, dtype=np.int64)
    # group subqueries per query, in input query order (stable: emission order kept)
    order = np.argsort(sq_q, kind="stable")
    sq_q, sq_leaf = sq_q[order], sq_leaf[order]

    levels = sq_leaf >> level_shift
    li, lj = morton.deinterleave_arrays(sq_leaf & z_mask)
    side = (1 << levels).astype(np.float64)
    w = mbr.width / side
    h = mbr.height / side
    lxa = mbr.xa + li * w
    lya = mbr.ya + lj * h
    covering = (
        (qxa[sq_q] <= lxa)
        & (qxb[sq_q] >= np.minimum(lxa + w, mbr.xb))
        & (qya[sq_q] <= lya)
        & (qyb[sq_q] >= np.minimum(lya + h, mbr.yb))
    )
    return SubQueryColumns(
        query_ids=qids[sq_q],
        cell_ids=sq_leaf,
        covering=covering,
        xa=qxa[sq_q],
        ya=qya[sq_q],
        xb=qxb[sq_q],
        yb=qyb[sq_q],
    )


def leaf_occupancy(index: QuadIndex, objects: Union[ObjectColumns, Sequence]) -> np.ndarray:
    """Current object count per leaf, aligned with index.leaves."""
    leaf_ids = map_objects_quad(objects, index)
    rows = np.searchsorted(index.leaves, leaf_ids)
    return np.bincount(rows, minlength=len(index.leaves)).astype(np.int64)


def needs_rebuild(
    index: QuadIndex,
    objects: Union[ObjectColumns, Sequence],
    overfull_factor: float = 2.0,
    overfull_fraction: float = 0.05,
    hard_factor: float = 8.0,
) -> bool:
    """Whether the object distribution drifted enough to re-partition.

    True when more than `overfull_fraction` of the leaves now hold more than
    overfull_factor * th_quad objects, or any single leaf exceeds
    hard_factor * th_quad.
    """
    try:
        counts = leaf_occupancy(index, objects)
    except OutOfBounds:
        return True  # objects escaped the old MBR
    if np.any(counts > hard_factor * index.th_quad):
        return True
    frac = float(np.mean(counts > overfull_factor * index.th_quad))
    return frac > overfull_fraction
