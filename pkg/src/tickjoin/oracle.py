"""Brute-force spatial join used as ground truth.

Deliberately independent of the engine: no grid, no Morton codes, no bitmaps,
nothing shared beyond the closed-rectangle containment semantics.  The outer
loop runs per query; the object scan underneath is a vectorized comparison,
which changes nothing about the quadratic test structure.
"""

from __future__ import annotations

import numpy as np

from .decode import ResultSet
from .geometry import TickBatch


def brute_force_join(batch: TickBatch) -> ResultSet:
    """Exact result set for every issued query of the batch."""
    n = len(batch.objects)
    ids = np.fromiter((o.id for o in batch.objects), dtype=np.int64, count=n)
    xs = np.fromiter((o.position.x for o in batch.objects), dtype=np.float64, count=n)
    ys = np.fromiter((o.position.y for o in batch.objects), dtype=np.float64, count=n)
    results: dict[int, list[int]] = {}
    for q in batch.queries:
        r = q.rect
        hit = (xs >= r.xa) & (xs <= r.xb) & (ys >= r.ya) & (ys <= r.yb)
        results[q.issuer_id] = np.sort(ids[hit]).tolist()
    return ResultSet(results)
