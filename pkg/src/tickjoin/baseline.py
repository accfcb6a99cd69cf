"""Direct result emission with a synchronized shared buffer.

This is the comparison path: no bitmaps, no decode.  Each cell task stages
(query id, object id) pairs privately and flushes full stages to a global
buffer through a locked cursor reservation, the contended operation the
bitmap layout exists to avoid.  Counters record every synchronized
reservation and every flush so the contention cost is machine-independent.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

STAGING_CAPACITY = 1024


@dataclass
class ContentionCounters:
    sync_ops: int = 0
    flushes: int = 0


class SharedResultBuffer:
    """Growable (query_id, object_id) pair buffer with a locked cursor.

    Slot reservation is a fetch-and-add under the lock; the pair copy stays
    inside the critical section so growth cannot race concurrent writers.
    Safe at any worker count.
    """

    def __init__(self, capacity: int = 4096) -> None:
        self._lock = threading.Lock()
        self._size = 0
        self._qids = np.empty(max(capacity, 1), dtype=np.int64)
        self._oids = np.empty(max(capacity, 1), dtype=np.int64)
        self.counters = ContentionCounters()

    def flush(self, qids: np.ndarray, oids: np.ndarray) -> None:
        n = len(qids)
        if n == 0:
            return
        with self._lock:
            self.counters.sync_ops += 1
            self.counters.flushes += 1
            start = self._size
            self._size += n
            if self._size > len(self._qids):
                new_cap = max(self._size, 2 * len(self._qids))
                self._qids = np.concatenate([self._qids, np.empty(new_cap - len(self._qids), dtype=np.int64)])
                self._oids = np.concatenate([self._oids, np.empty(new_cap - len(self._oids), dtype=np.int64)])
            self._qids[start : self._size] = qids
            self._oids[start : self._size] = oids

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return self._qids[: self._size], self._oids[: self._size]

    def __len__(self) -> int:
        return self._size


class _Staging:
    """Task-private pair stage of bounded size; flushes whole stages."""

    def __init__(self, buffer: SharedResultBuffer, capacity: int) -> None:
        self.buffer = buffer
        self.capacity = capacity
        self.qids = np.empty(capacity, dtype=np.int64)
        self.oids = np.empty(capacity, dtype=np.int64)
        self.fill = 0

    def append(self, qid: int, oids: np.ndarray) -> None:
        done = 0
        while done < len(oids):
            take = min(self.capacity - self.fill, len(oids) - done)
            self.qids[self.fill : self.fill + take] = qid
            self.oids[self.fill : self.fill + take] = oids[done : done + take]
            self.fill += take
            done += take
            if self.fill == self.capacity:
                self.buffer.flush(self.qids, self.oids)
                self.fill = 0

    def close(self) -> None:
        if self.fill:
            self.buffer.flush(self.qids[: self.fill], self.oids[: self.fill])
            self.fill = 0


def filter_direct(
    obj_ids: np.ndarray,
    obj_xs: np.ndarray,
    obj_ys: np.ndarray,
    sq_query_ids: np.ndarray,
    sq_xa: np.ndarray,
    sq_ya: np.ndarray,
    sq_xb: np.ndarray,
    sq_yb: np.ndarray,
    buffer: SharedResultBuffer,
    staging_capacity: int = STAGING_CAPACITY,
) -> int:
    """Run one cell's containment tests, appending positives to the buffer.

    Returns the number of pairs produced by this cell.
    """
    staging = _Staging(buffer, staging_capacity)
    produced = 0
    for s in range(len(sq_query_ids)):
        mask = (
            (obj_xs >= sq_xa[s])
            & (obj_xs <= sq_xb[s])
            & (obj_ys >= sq_ya[s])
            & (obj_ys <= sq_yb[s])
        )
        hits = obj_ids[mask]
        produced += len(hits)
        staging.append(int(sq_query_ids[s]), hits)
    staging.close()
    return produced
