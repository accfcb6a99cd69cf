"""Static task ordering, simulated processor assignment, and the task pool.

A task is one active cell's filtering (or decoding) work; its weight is the
number of containment tests it performs.  The simulator models a bank of
processors taking tasks greedily from the ordered list and reports how
unevenly the work lands, which is the load-balance metric the scheduling
policies are judged by.  Scheduling never changes results, only the metrics.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class CellTask:
    cell_id: int
    weight: int


@dataclass
class ImbalanceReport:
    totals: np.ndarray  # per-worker weight totals
    imbalance: float  # (max - min) / max, 0 when idle or perfectly balanced


def order_tasks(tasks: Sequence[CellTask], policy: str) -> list[CellTask]:
    """`heaviest_first` sorts by descending weight (ties: cell id ascending);
    `unordered` keeps the directory order."""
    if policy == "unordered":
        return list(tasks)
    if policy == "heaviest_first":
        return sorted(tasks, key=lambda t: (-t.weight, t.cell_id))
    raise ValueError(f"unknown scheduling policy: {policy}")


def simulate_assignment(tasks: Sequence[CellTask], n_workers: int) -> ImbalanceReport:
    """Greedy dispatch: each task goes to the least-loaded worker so far.

    Ties break to the lowest worker index, which makes the assignment (and
    the report) deterministic.
    """
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1: {n_workers}")
    totals = np.zeros(n_workers, dtype=np.int64)
    for t in tasks:
        totals[int(np.argmin(totals))] += t.weight
    top = int(totals.max())
    imbalance = 0.0 if top == 0 else float(top - int(totals.min())) / top
    return ImbalanceReport(totals, imbalance)


def run_tasks(n_tasks: int, fn: Callable[[int], None], n_workers: int) -> None:
    """Execute fn(0..n_tasks-1), each exactly once, on n_workers threads.

    Workers claim indices through a shared fetch-and-increment, so a task
    list ordered by weight is consumed heaviest-first regardless of worker
    count.  With one worker this is a plain loop.
    """
    if n_workers <= 1 or n_tasks <= 1:
        for t in range(n_tasks):
            fn(t)
        return

    lock = threading.Lock()
    cursor = 0
    errors: list[BaseException] = []

    def claim() -> int:
        nonlocal cursor
        with lock:
            idx = cursor
            cursor += 1
            return idx

    def worker() -> None:
        while True:
            idx = claim()
            if idx >= n_tasks:
                return
            try:
                fn(idx)
            except BaseException as exc:  # surface the first failure to the caller
                with lock:
                    errors.append(exc)
                return

    threads = [threading.Thread(target=worker) for _ in range(n_workers)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        raise errors[0]
