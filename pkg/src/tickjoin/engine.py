"""Per-tick pipeline orchestration and the QoS latency model.

One tick runs index creation, object/query indexing and sorting, bitmap
filtering (or the direct baseline), decoding, covering expansion, and the
final merge.  Results are independent of worker count, scheduling policy,
chunk size, and the covering optimization; those knobs only move the
machine-independent counters and the wall-clock timings collected per phase.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import baseline, bitmap, grid, quadtree
from .decode import ResultSet, chunk_ranges, decode_cell, expand_covering, merge_results
from .directory import CellDirectory, ObjectColumns, SubQueryColumns, sort_by_cell
from .errors import BadConfig, BadQos, VerificationFailure
from .geometry import TickBatch, compute_mbr
from .morton import L_MAX
from .oracle import brute_force_join
from .scheduler import CellTask, order_tasks, run_tasks, simulate_assignment
from .workload import WorkloadRun

METHODS = ("ug", "ug_baseline", "quad")
DEFAULT_SWEEP = (16, 256, 16)


@dataclass(frozen=True)
class QosParams:
    """Latency model inputs: tick duration, latency threshold, peak queries."""

    delta_t: float
    lam: float
    q_max: int


def check_latency(exec_time: float, qos: QosParams) -> bool:
    """Tick latency requirement: queueing (one tick) plus execution within lam.

    The bound is non-strict: hitting the threshold exactly still passes.
    """
    return qos.delta_t + exec_time <= qos.lam


def min_bandwidth(qos: QosParams) -> float:
    """Queries per time unit needed to absorb q_max within the threshold."""
    if qos.lam <= qos.delta_t:
        raise BadQos(f"latency threshold {qos.lam} must exceed tick duration {qos.delta_t}")
    return qos.q_max / (qos.lam - qos.delta_t)


@dataclass
class MethodConfig:
    method: str = "quad"
    split_factor: Optional[int] = None  # ug; None means sweep on the first tick
    sweep: Optional[tuple[int, int, int]] = None  # lo, hi, step (inclusive bounds)
    th_quad: int = 384
    l_max: int = L_MAX
    covering_optimization: bool = True
    schedule: str = "heaviest_first"
    n_workers: int = 1
    chunk_size: int = 64
    rebuild: str = "every_tick"  # or "adaptive": reuse until occupancy drifts
    sim_processors: int = 8
    staging_capacity: int = baseline.STAGING_CAPACITY
    label: Optional[str] = None

    def validate(self) -> None:
        if self.method not in METHODS:
            raise BadConfig(f"unknown method {self.method!r}")
        if self.method == "quad":
            if self.th_quad < 1:
                raise BadConfig("th_quad must be >= 1")
            if not 1 <= self.l_max <= L_MAX:
                raise BadConfig(f"l_max must be in [1, {L_MAX}]")
        elif self.split_factor is not None and self.split_factor < 1:
            raise BadConfig("split_factor must be >= 1")
        if self.schedule not in ("heaviest_first", "unordered"):
            raise BadConfig(f"unknown schedule {self.schedule!r}")
        if self.n_workers < 1 or self.chunk_size < 1 or self.sim_processors < 1:
            raise BadConfig("n_workers, chunk_size and sim_processors must be >= 1")
        if self.rebuild not in ("every_tick", "adaptive"):
            raise BadConfig(f"unknown rebuild policy {self.rebuild!r}")

    @property
    def name(self) -> str:
        return self.label or self.method

    def sweep_candidates(self) -> list[int]:
        lo, hi, step = self.sweep or DEFAULT_SWEEP
        return list(range(lo, hi + 1, step))


@dataclass
class TickStats:
    tick: int
    method: str
    n_objects: int = 0
    n_queries: int = 0
    containment_tests: int = 0
    decoded_bits: int = 0
    subq_intersecting: int = 0
    subq_covering: int = 0
    covering_results: int = 0
    covering_result_fraction: float = 0.0
    active_cells: int = 0
    occupancy_mean: float = 0.0
    occupancy_var: float = 0.0
    dispersion: float = 0.0
    imbalance: float = 0.0
    sync_ops: int = 0
    flushes: int = 0
    results_total: int = 0
    split_factor: Optional[int] = None
    durations: dict = field(default_factory=dict)
    qos_pass: Optional[bool] = None


@dataclass
class RunReport:
    label: str
    stats: list[TickStats]
    bandwidth: float
    result_sets: Optional[list[ResultSet]] = None
    sweep_costs: Optional[list[tuple[int, int]]] = None

    @property
    def total_queries(self) -> int:
        return sum(s.n_queries for s in self.stats)


class Engine:
    """Processes ticks one at a time for a fixed method configuration."""

    def __init__(self, cfg: MethodConfig) -> None:
        cfg.validate()
        self.cfg = cfg
        self._split_factor = cfg.split_factor
        self._quad: Optional[quadtree.QuadIndex] = None
        self.sweep_costs: Optional[list[tuple[int, int]]] = None

    @property
    def split_factor(self) -> Optional[int]:
        """Configured or swept split factor (ug paths), once known."""
        return self._split_factor

    # -- indexing -----------------------------------------------------------

    def _index_ug(self, batch: TickBatch, cols: ObjectColumns, mbr):
        if self._split_factor is None:
            self.sweep_costs = grid.sweep_costs(batch, self.cfg.sweep_candidates())
            self._split_factor = min(self.sweep_costs, key=lambda c: (c[1], c[0]))[0]
        spec = grid.build_grid(mbr, self._split_factor)
        cell_ids = grid.map_objects(cols, spec)
        clipped = grid.clip_queries(batch.queries, mbr)
        return cell_ids, grid.split_queries(clipped, spec)

    def _index_quad(self, batch: TickBatch, cols: ObjectColumns, mbr):
        rebuild = (
            self._quad is None
            or self.cfg.rebuild == "every_tick"
            or quadtree.needs_rebuild(self._quad, cols)
        )
        if rebuild:
            self._quad = quadtree.build_quadtree(cols, self.cfg.th_quad, self.cfg.l_max, mbr)
        # cells are defined over the index MBR, which may predate this tick
        clipped = grid.clip_queries(batch.queries, self._quad.mbr)
        cell_ids = quadtree.map_objects_quad(cols, self._quad)
        return cell_ids, quadtree.split_queries_quad(clipped, self._quad)

    # -- pipeline -----------------------------------------------------------

    def process_tick(self, batch: TickBatch) -> tuple[ResultSet, TickStats]:
        cfg = self.cfg
        stats = TickStats(
            tick=batch.tick_index,
            method=cfg.name,
            n_objects=len(batch.objects),
            n_queries=len(batch.queries),
        )
        issued = [q.issuer_id for q in batch.queries]
        t0 = time.perf_counter()
        if not batch.objects:
            stats.durations = {"index": 0.0, "filter": 0.0, "decode": 0.0, "total": 0.0}
            return ResultSet({int(q): [] for q in issued}), stats

        cols = ObjectColumns.from_objects(batch.objects)
        mbr = compute_mbr(batch)
        if cfg.method in ("ug", "ug_baseline"):
            cell_ids, subq = self._index_ug(batch, cols, mbr)
            stats.split_factor = self._split_factor
        else:
            cell_ids, subq = self._index_quad(batch, cols, mbr)
        if not cfg.covering_optimization:
            subq = SubQueryColumns(
                subq.query_ids,
                subq.cell_ids,
                np.zeros(len(subq), dtype=bool),
                subq.xa,
                subq.ya,
                subq.xb,
                subq.yb,
            )
        d = sort_by_cell(cols, cell_ids, subq)
        t1 = time.perf_counter()

        self._occupancy_stats(d, stats)
        stats.subq_intersecting = len(d.isq)
        stats.subq_covering = len(d.cov)

        n_obj = d.o_end - d.o_start
        n_isq = d.i_end - d.i_start
        task_rows = np.flatnonzero((n_obj > 0) & (n_isq > 0))
        tasks = [
            CellTask(int(d.cell_ids[r]), int(n_isq[r]) * int(n_obj[r])) for r in task_rows
        ]
        ordered = order_tasks(tasks, cfg.schedule)
        row_of = {int(d.cell_ids[r]): int(r) for r in task_rows}
        rows = [row_of[t.cell_id] for t in ordered]
        stats.containment_tests = sum(t.weight for t in tasks)
        stats.imbalance = simulate_assignment(ordered, cfg.sim_processors).imbalance

        cov_holder: list = []
        cov_thread = None
        if cfg.n_workers > 1:
            cov_thread = threading.Thread(target=lambda: cov_holder.append(expand_covering(d)))
            cov_thread.start()

        if cfg.method == "ug_baseline":
            chunks, t2 = self._filter_baseline(d, rows, stats)
            t3 = t2  # no decode phase
        else:
            chunks, t2, t3 = self._filter_and_decode(d, ordered, rows, stats)

        if cov_thread is not None:
            cov_thread.join()
            cov_chunks = cov_holder[0]
        else:
            cov_chunks = expand_covering(d)
        stats.covering_results = sum(len(ids) for _, ids in cov_chunks)

        rs = merge_results(chunks + cov_chunks, issued)
        stats.results_total = rs.total
        if stats.results_total:
            stats.covering_result_fraction = stats.covering_results / stats.results_total
        t4 = time.perf_counter()
        stats.durations = {
            "index": t1 - t0,
            "filter": t2 - t1,
            "decode": t3 - t2,
            "merge": t4 - t3,
            "total": t4 - t0,
        }
        return rs, stats

    def _occupancy_stats(self, d: CellDirectory, stats: TickStats) -> None:
        occ = (d.o_end - d.o_start)[d.o_end > d.o_start]
        stats.active_cells = len(occ)
        if len(occ):
            stats.occupancy_mean = float(occ.mean())
            stats.occupancy_var = float(occ.var())
            stats.dispersion = stats.occupancy_var / stats.occupancy_mean

    def _filter_and_decode(self, d: CellDirectory, ordered, rows, stats: TickStats):
        cfg = self.cfg
        n_tasks = len(ordered)
        n_obj = (d.o_end - d.o_start)[rows]
        n_isq = (d.i_end - d.i_start)[rows]
        blocks = -(n_obj // -bitmap.WORD_BITS)
        words = n_isq * blocks
        word_offsets = np.concatenate([[0], np.cumsum(words)]).astype(np.int64)
        arena = np.zeros(int(word_offsets[-1]), dtype=np.uint32)  # interlaced
        arena_lin = np.zeros_like(arena)
        stats.decoded_bits = int(word_offsets[-1]) * bitmap.WORD_BITS

        bitmaps: list = [None] * n_tasks
        counts: list = [None] * n_tasks

        def filter_task(k: int) -> None:
            r = rows[k]
            os, oe = d.o_start[r], d.o_end[r]
            qs, qe = d.i_start[r], d.i_end[r]
            span = slice(word_offsets[k], word_offsets[k + 1])
            ib = bitmap.generate_interlaced(
                ordered[k].cell_id,
                d.obj_xs[os:oe],
                d.obj_ys[os:oe],
                d.isq.xa[qs:qe],
                d.isq.ya[qs:qe],
                d.isq.xb[qs:qe],
                d.isq.yb[qs:qe],
                out=arena[span],
            )
            lb = bitmap.linearize(ib, out=arena_lin[span])
            bitmaps[k] = lb
            counts[k] = bitmap.count_results(lb)

        run_tasks(n_tasks, filter_task, cfg.n_workers)
        t2 = time.perf_counter()

        # decode reuses the static-list idea with word counts as weights
        if cfg.schedule == "heaviest_first":
            decode_idx = sorted(range(n_tasks), key=lambda k: (-int(words[k]), ordered[k].cell_id))
        else:
            decode_idx = list(range(n_tasks))

        chunks_out: list = [None] * n_tasks

        def decode_task(k: int) -> None:
            t = decode_idx[k]
            r = rows[t]
            block_ids = d.obj_ids[d.o_start[r] : d.o_end[r]]
            qids = d.isq.query_ids[d.i_start[r] : d.i_end[r]]
            ids, found = decode_cell(bitmaps[t], counts[t], block_ids)
            bounds = np.concatenate([[0], np.cumsum(found)])
            chunks_out[t] = [
                (int(qids[s]), ids[bounds[s] : bounds[s + 1]]) for s in range(len(qids))
            ]

        for chunk in chunk_ranges(n_tasks, cfg.chunk_size):
            run_tasks(len(chunk), lambda m, base=chunk.start: decode_task(base + m), cfg.n_workers)
        t3 = time.perf_counter()
        flat = [pair for per_task in chunks_out for pair in per_task]
        return flat, t2, t3

    def _filter_baseline(self, d: CellDirectory, rows, stats: TickStats):
        cfg = self.cfg
        buffer = baseline.SharedResultBuffer()

        def task(k: int) -> None:
            r = rows[k]
            os, oe = d.o_start[r], d.o_end[r]
            qs, qe = d.i_start[r], d.i_end[r]
            baseline.filter_direct(
                d.obj_ids[os:oe],
                d.obj_xs[os:oe],
                d.obj_ys[os:oe],
                d.isq.query_ids[qs:qe],
                d.isq.xa[qs:qe],
                d.isq.ya[qs:qe],
                d.isq.xb[qs:qe],
                d.isq.yb[qs:qe],
                buffer,
                staging_capacity=cfg.staging_capacity,
            )

        run_tasks(len(rows), task, cfg.n_workers)
        stats.sync_ops = buffer.counters.sync_ops
        stats.flushes = buffer.counters.flushes

        qids, oids = buffer.pairs()
        if len(qids) == 0:
            return [], time.perf_counter()
        order = np.argsort(qids, kind="stable")
        qids, oids = qids[order], oids[order]
        starts = np.flatnonzero(np.concatenate([[True], qids[1:] != qids[:-1]]))
        bounds = np.concatenate([starts, [len(qids)]])
        chunks = [
            (int(qids[bounds[m]]), oids[bounds[m] : bounds[m + 1]]) for m in range(len(starts))
        ]
        return chunks, time.perf_counter()

    # -- runs ---------------------------------------------------------------

    def run(
        self,
        workload: WorkloadRun,
        qos: Optional[QosParams] = None,
        verify: bool = False,
        keep_results: bool = False,
    ) -> RunReport:
        stats_list: list[TickStats] = []
        kept: list[ResultSet] = []
        total_time = 0.0
        for batch in workload.batches:
            rs, stats = self.process_tick(batch)
            if verify:
                expected = brute_force_join(batch)
                if rs != expected:
                    raise VerificationFailure(
                        f"tick {batch.tick_index}: {self.cfg.name} deviates from the oracle"
                    )
            if qos is not None:
                stats.qos_pass = check_latency(stats.durations["total"], qos)
            total_time += stats.durations["total"]
            stats_list.append(stats)
            if keep_results:
                kept.append(rs)
        queries = sum(s.n_queries for s in stats_list)
        bandwidth = queries / total_time if total_time > 0 else 0.0
        return RunReport(
            label=self.cfg.name,
            stats=stats_list,
            bandwidth=bandwidth,
            result_sets=kept if keep_results else None,
            sweep_costs=self.sweep_costs,
        )


def process_tick(batch: TickBatch, cfg: MethodConfig) -> tuple[ResultSet, TickStats]:
    """One-shot convenience wrapper around a fresh Engine."""
    return Engine(cfg).process_tick(batch)


def run(
    workload: WorkloadRun,
    cfg: MethodConfig,
    qos: Optional[QosParams] = None,
    verify: bool = False,
    keep_results: bool = False,
) -> RunReport:
    return Engine(cfg).run(workload, qos=qos, verify=verify, keep_results=keep_results)
