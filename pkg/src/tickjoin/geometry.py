"""Geometric primitives shared by the indices, the pipeline, and the oracle.

Rectangles are closed on all four edges: a point sitting exactly on a border
belongs to the rectangle.  Ties on shared grid-cell borders are resolved by
the index mapping (floor semantics), not by the containment predicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyBatch


@dataclass(frozen=True)
class Point:
    x: float
    y: float


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with lower-left (xa, ya) and upper-right (xb, yb)."""

    xa: float
    ya: float
    xb: float
    yb: float

    def __post_init__(self) -> None:
        if not (self.xa <= self.xb and self.ya <= self.yb):
            raise ValueError(f"invalid rect corners: {self}")

    @property
    def width(self) -> float:
        return self.xb - self.xa

    @property
    def height(self) -> float:
        return self.yb - self.ya


@dataclass(frozen=True)
class MovingObject:
    id: int
    position: Point


@dataclass(frozen=True)
class Query:
    issuer_id: int
    rect: Rect


@dataclass
class TickBatch:
    """Per-tick input: up-to-date object positions and the queries issued."""

    tick_index: int
    objects: list[MovingObject]
    queries: list[Query]


def contains(rect: Rect, p: Point) -> bool:
    """Closed containment test on all four edges."""
    return rect.xa <= p.x <= rect.xb and rect.ya <= p.y <= rect.yb


def compute_mbr(batch: TickBatch) -> Rect:
    """Smallest closed rectangle bounding all object positions of the batch."""
    if not batch.objects:
        raise EmptyBatch("cannot compute the MBR of a batch without objects")
    _, xs, ys = object_arrays(batch.objects)
    return Rect(float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))


def clip(q: Rect, mbr: Rect) -> Optional[Rect]:
    """Intersection of two rectangles, or None when they are disjoint."""
    xa = max(q.xa, mbr.xa)
    ya = max(q.ya, mbr.ya)
    xb = min(q.xb, mbr.xb)
    yb = min(q.yb, mbr.yb)
    if xa > xb or ya > yb:
        return None
    return Rect(xa, ya, xb, yb)


def object_arrays(objects: Sequence[MovingObject]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Columnar (structure-of-vectors) view of an object sequence."""
    n = len(objects)
    ids = np.fromiter((o.id for o in objects), dtype=np.int64, count=n)
    xs = np.fromiter((o.position.x for o in objects), dtype=np.float64, count=n)
    ys = np.fromiter((o.position.y for o in objects), dtype=np.float64, count=n)
    return ids, xs, ys


def query_arrays(
    queries: Sequence[Query],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Columnar view of a query sequence: issuer ids and the four corners."""
    n = len(queries)
    ids = np.fromiter((q.issuer_id for q in queries), dtype=np.int64, count=n)
    xa = np.fromiter((q.rect.xa for q in queries), dtype=np.float64, count=n)
    ya = np.fromiter((q.rect.ya for q in queries), dtype=np.float64, count=n)
    xb = np.fromiter((q.rect.xb for q in queries), dtype=np.float64, count=n)
    yb = np.fromiter((q.rect.yb for q in queries), dtype=np.float64, count=n)
    return ids, xa, ya, xb, yb
