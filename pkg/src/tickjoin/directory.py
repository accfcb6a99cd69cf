"""Columnar storage of objects and subqueries sorted by index cell.

Everything downstream of indexing (filtering, decoding, covering expansion)
works on this structure-of-vectors layout: entities mapped to the same cell
occupy one contiguous block of each vector, and a boundary table gives every
cell's block extents.  Intersecting subqueries are stored apart from covering
ones so that, per cell, the intersecting block precedes the covering block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .geometry import MovingObject, object_arrays


@dataclass(frozen=True)
class SubQuery:
    """Restriction of a query to one index cell."""

    query_id: int
    cell_id: int
    covering: bool


@dataclass
class ObjectColumns:
    ids: np.ndarray
    xs: np.ndarray
    ys: np.ndarray

    @classmethod
    def from_objects(cls, objects: Sequence[MovingObject]) -> "ObjectColumns":
        ids, xs, ys = object_arrays(objects)
        return cls(ids, xs, ys)

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class SubQueryColumns:
    """Structure-of-vectors of subqueries; rects are the clipped query rects."""

    query_ids: np.ndarray
    cell_ids: np.ndarray
    covering: np.ndarray
    xa: np.ndarray
    ya: np.ndarray
    xb: np.ndarray
    yb: np.ndarray

    @classmethod
    def empty(cls) -> "SubQueryColumns":
        z = np.zeros(0, dtype=np.int64)
        f = np.zeros(0, dtype=np.float64)
        return cls(z, z.copy(), np.zeros(0, dtype=bool), f, f.copy(), f.copy(), f.copy())

    def __len__(self) -> int:
        return len(self.query_ids)

    def __iter__(self) -> Iterator[SubQuery]:
        for k in range(len(self)):
            yield SubQuery(int(self.query_ids[k]), int(self.cell_ids[k]), bool(self.covering[k]))

    def take(self, idx: np.ndarray) -> "SubQueryColumns":
        return SubQueryColumns(
            self.query_ids[idx],
            self.cell_ids[idx],
            self.covering[idx],
            self.xa[idx],
            self.ya[idx],
            self.xb[idx],
            self.yb[idx],
        )


@dataclass
class CellDirectory:
    """Objects and subqueries sorted by cell id, plus per-cell block boundaries.

    `cell_ids` is the sorted union of cells referenced by any vector; the
    six offset arrays are aligned with it and partition each vector exactly.
    """

    obj_ids: np.ndarray
    obj_xs: np.ndarray
    obj_ys: np.ndarray
    obj_cell_ids: np.ndarray
    isq: SubQueryColumns
    cov: SubQueryColumns
    cell_ids: np.ndarray
    o_start: np.ndarray
    o_end: np.ndarray
    i_start: np.ndarray
    i_end: np.ndarray
    c_start: np.ndarray
    c_end: np.ndarray

    @property
    def active_cells(self) -> np.ndarray:
        """Cells holding at least one object."""
        return self.cell_ids[self.o_end > self.o_start]

    def cell_row(self, cell_id: int) -> int:
        row = int(np.searchsorted(self.cell_ids, cell_id))
        if row >= len(self.cell_ids) or self.cell_ids[row] != cell_id:
            raise KeyError(f"cell {cell_id} not present in the directory")
        return row

    def object_block(self, cell_id: int) -> np.ndarray:
        row = self.cell_row(cell_id)
        return self.obj_ids[self.o_start[row] : self.o_end[row]]


def sort_by_cell(
    objects: ObjectColumns, obj_cell_ids: np.ndarray, subqueries: SubQueryColumns
) -> CellDirectory:
    """Stable sort of objects and subqueries by cell id into a CellDirectory.

    Stability makes the layout, and therefore every downstream bitmap and
    result, deterministic.  Subqueries are keyed by (cell id, covering flag)
    so intersecting subqueries land before covering ones.
    """
    obj_order = np.argsort(obj_cell_ids, kind="stable")
    obj_cells = obj_cell_ids[obj_order]

    sq_order = np.lexsort((subqueries.covering, subqueries.cell_ids))
    sq = subqueries.take(sq_order)
    isq = sq.take(np.flatnonzero(~sq.covering))
    cov = sq.take(np.flatnonzero(sq.covering))

    cells = np.unique(np.concatenate([obj_cells, isq.cell_ids, cov.cell_ids]))
    o_start = np.searchsorted(obj_cells, cells, side="left")
    o_end = np.searchsorted(obj_cells, cells, side="right")
    i_start = np.searchsorted(isq.cell_ids, cells, side="left")
    i_end = np.searchsorted(isq.cell_ids, cells, side="right")
    c_start = np.searchsorted(cov.cell_ids, cells, side="left")
    c_end = np.searchsorted(cov.cell_ids, cells, side="right")

    return CellDirectory(
        obj_ids=objects.ids[obj_order],
        obj_xs=objects.xs[obj_order],
        obj_ys=objects.ys[obj_order],
        obj_cell_ids=obj_cells,
        isq=isq,
        cov=cov,
        cell_ids=cells,
        o_start=o_start,
        o_end=o_end,
        i_start=i_start,
        i_end=i_end,
        c_start=c_start,
        c_end=c_end,
    )
