"""Deterministic synthetic workloads: placement, movement, query issuance.

Three object distributions are supported: uniform over the region, gaussian
clusters around random hotspots, and a synthetic Manhattan road grid (objects
live on and move along the grid lines).  All randomness flows from one seed
through PCG64 streams split per purpose (placement / movement / queries), and
vectorized draws are indexed by object id, so a (config, seed) pair yields a
byte-identical run on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO, Union

import numpy as np

from .errors import BadConfig
from .geometry import MovingObject, Point, Query, Rect, TickBatch

DISTRIBUTIONS = ("uniform", "gaussian", "network")
FORMAT_MAGIC = "tickjoin-v1"


@dataclass(frozen=True)
class WorkloadConfig:
    n_objects: int
    n_ticks: int = 30
    region_side: float = 22500.0
    max_speed: float = 200.0
    query_rate: float = 1.0
    query_side: Union[float, tuple[float, float]] = (200.0, 800.0)
    distribution: str = "uniform"
    n_hotspots: int = 25
    sigma: Optional[float] = None  # gaussian spread; defaults to region_side / 100
    grid_degree: int = 10
    seed: int = 0

    def validate(self) -> None:
        if self.n_objects < 1 or self.n_ticks < 1:
            raise BadConfig("n_objects and n_ticks must be positive")
        if self.region_side <= 0 or self.region_side > 2**20:
            raise BadConfig("region_side must be in (0, 2**20] spatial units")
        if self.max_speed < 0:
            raise BadConfig("max_speed must be non-negative")
        if not 0.0 <= self.query_rate <= 1.0:
            raise BadConfig("query_rate must be within [0, 1]")
        lo, hi = self.query_side_range
        if not 0 < lo <= hi <= self.region_side:
            raise BadConfig("query_side must be positive and fit inside the region")
        if self.distribution not in DISTRIBUTIONS:
            raise BadConfig(f"unknown distribution {self.distribution!r}")
        if self.distribution == "gaussian":
            if self.n_hotspots < 1:
                raise BadConfig("gaussian needs n_hotspots >= 1")
            if self.sigma is not None and self.sigma <= 0:
                raise BadConfig("sigma must be positive")
        if self.distribution == "network" and self.grid_degree < 1:
            raise BadConfig("network needs grid_degree >= 1")

    @property
    def query_side_range(self) -> tuple[float, float]:
        if isinstance(self.query_side, (int, float)):
            return float(self.query_side), float(self.query_side)
        lo, hi = self.query_side
        return float(lo), float(hi)

    @property
    def effective_sigma(self) -> float:
        # default keeps clusters two orders of magnitude tighter than the region
        return self.sigma if self.sigma is not None else self.region_side / 100.0


@dataclass
class WorkloadState:
    """Mutable positions plus per-object road-network state (when relevant)."""

    config: WorkloadConfig
    xs: np.ndarray
    ys: np.ndarray
    move_rng: Optional[np.random.Generator]
    query_rng: Optional[np.random.Generator]
    net_axis: Optional[np.ndarray] = None  # 0: moving along x, 1: along y
    net_line: Optional[np.ndarray] = None  # fixed coordinate (the line)
    net_along: Optional[np.ndarray] = None  # varying coordinate


@dataclass
class WorkloadRun:
    region_side: float
    batches: list[TickBatch] = field(default_factory=list)

    @property
    def n_ticks(self) -> int:
        return len(self.batches)

    @property
    def n_objects(self) -> int:
        return len(self.batches[0].objects) if self.batches else 0

    @property
    def max_queries_per_tick(self) -> int:
        return max((len(b.queries) for b in self.batches), default=0)


def _reflect(values: np.ndarray, side: float) -> np.ndarray:
    """Fold values into [0, side] as if bouncing off both borders.

    Values already inside pass through bit-identically.
    """
    values = np.asarray(values, dtype=np.float64)
    outside = (values < 0.0) | (values > side)
    if not np.any(outside):
        return values
    out = values.copy()
    out[outside] = side - np.abs(np.mod(out[outside], 2.0 * side) - side)
    return out


def _initial_positions(config: WorkloadConfig, rng: np.random.Generator) -> WorkloadState:
    n = config.n_objects
    side = config.region_side
    if config.distribution == "uniform":
        xs = rng.uniform(0.0, side, n)
        ys = rng.uniform(0.0, side, n)
        return WorkloadState(config, xs, ys, None, None)
    if config.distribution == "gaussian":
        centers_x = rng.uniform(0.0, side, config.n_hotspots)
        centers_y = rng.uniform(0.0, side, config.n_hotspots)
        pick = rng.integers(0, config.n_hotspots, n)
        xs = _reflect(centers_x[pick] + rng.normal(0.0, config.effective_sigma, n), side)
        ys = _reflect(centers_y[pick] + rng.normal(0.0, config.effective_sigma, n), side)
        return WorkloadState(config, xs, ys, None, None)
    # network: lines at multiples of spacing in both directions
    spacing = side / config.grid_degree
    axis = rng.integers(0, 2, n)
    line = rng.integers(0, config.grid_degree + 1, n) * spacing
    along = rng.uniform(0.0, side, n)
    xs = np.where(axis == 0, along, line)
    ys = np.where(axis == 0, line, along)
    state = WorkloadState(config, xs, ys, None, None, axis, line, along)
    return state


def advance_tick(state: WorkloadState) -> tuple[np.ndarray, np.ndarray]:
    """Move every object by at most max_speed, reflecting at the borders.

    Uniform and gaussian objects take a uniformly drawn step in a uniformly
    drawn direction.  Network objects slide along their current line and may
    turn at the nearest grid intersection they cross, spending the remaining
    distance on the new line.  Returns the new position arrays.
    """
    cfg = state.config
    n = cfg.n_objects
    side = cfg.region_side
    rng = state.move_rng
    if cfg.distribution in ("uniform", "gaussian"):
        angle = rng.uniform(0.0, 2.0 * math.pi, n)
        dist = rng.uniform(0.0, cfg.max_speed, n)
        state.xs = _reflect(state.xs + dist * np.cos(angle), side)
        state.ys = _reflect(state.ys + dist * np.sin(angle), side)
        return state.xs, state.ys

    spacing = side / cfg.grid_degree
    step = rng.uniform(-cfg.max_speed, cfg.max_speed, n)
    turn_flip = rng.random(n) < 0.5
    turn_dir = np.where(rng.random(n) < 0.5, 1.0, -1.0)

    old = state.net_along
    new = _reflect(old + step, side)
    nearest = np.round(new / spacing) * spacing
    crossed = (np.minimum(old, new) <= nearest) & (nearest <= np.maximum(old, new))
    turning = crossed & turn_flip

    leftover = np.abs(new - nearest)
    new_line = np.where(turning, nearest, state.net_line)
    new_along = np.where(turning, _reflect(state.net_line + turn_dir * leftover, side), new)
    new_axis = np.where(turning, 1 - state.net_axis, state.net_axis)

    state.net_axis = new_axis
    state.net_line = new_line
    state.net_along = new_along
    state.xs = np.where(new_axis == 0, new_along, new_line)
    state.ys = np.where(new_axis == 0, new_line, new_along)
    return state.xs, state.ys


def issue_queries(
    ids: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
    query_rate: float,
    query_side: tuple[float, float],
    rng: np.random.Generator,
) -> list[Query]:
    """Each object independently issues, with probability query_rate, one
    square query of the configured side centered on its position."""
    issue = rng.random(len(ids)) < query_rate
    issuers = np.flatnonzero(issue)
    lo, hi = query_side
    half = (rng.uniform(lo, hi, len(issuers)) if hi > lo else np.full(len(issuers), lo)) / 2.0
    return [
        Query(
            int(ids[k]),
            Rect(float(xs[k] - half[m]), float(ys[k] - half[m]), float(xs[k] + half[m]), float(ys[k] + half[m])),
        )
        for m, k in enumerate(issuers)
    ]


def _batch(tick: int, ids: np.ndarray, state: WorkloadState, queries: list[Query]) -> TickBatch:
    objects = [
        MovingObject(int(ids[k]), Point(float(state.xs[k]), float(state.ys[k])))
        for k in range(len(ids))
    ]
    return TickBatch(tick, objects, queries)


def generate(config: WorkloadConfig) -> WorkloadRun:
    """Full deterministic run: tick-0 placement, then move-and-query per tick."""
    config.validate()
    root = np.random.SeedSequence(config.seed)
    ss_place, ss_move, ss_query = root.spawn(3)
    state = _initial_positions(config, np.random.Generator(np.random.PCG64(ss_place)))
    state.move_rng = np.random.Generator(np.random.PCG64(ss_move))
    state.query_rng = np.random.Generator(np.random.PCG64(ss_query))

    ids = np.arange(config.n_objects, dtype=np.int64)
    run = WorkloadRun(config.region_side)
    for tick in range(config.n_ticks):
        if tick > 0:
            advance_tick(state)
        queries = issue_queries(
            ids, state.xs, state.ys, config.query_rate, config.query_side_range, state.query_rng
        )
        run.batches.append(_batch(tick, ids, state, queries))
    return run


def write_run(run: WorkloadRun, fp: TextIO) -> None:
    fp.write(f"{FORMAT_MAGIC} {run.n_objects} {run.n_ticks} {run.region_side!r}\n")
    for batch in run.batches:
        for o in batch.objects:
            fp.write(f"O {o.id} {o.position.x!r} {o.position.y!r}\n")
        for q in batch.queries:
            r = q.rect
            fp.write(f"Q {q.issuer_id} {r.xa!r} {r.ya!r} {r.xb!r} {r.yb!r}\n")


def read_run(fp: TextIO) -> WorkloadRun:
    header = fp.readline().split()
    if len(header) != 4 or header[0] != FORMAT_MAGIC:
        raise BadConfig(f"not a {FORMAT_MAGIC} dataset")
    n_objects, n_ticks, region_side = int(header[1]), int(header[2]), float(header[3])
    run = WorkloadRun(region_side)
    line = fp.readline()
    for tick in range(n_ticks):
        objects = []
        for _ in range(n_objects):
            parts = line.split()
            if not parts or parts[0] != "O":
                raise BadConfig(f"tick {tick}: expected an object line, got {line!r}")
            objects.append(MovingObject(int(parts[1]), Point(float(parts[2]), float(parts[3]))))
            line = fp.readline()
        queries = []
        while line:
            parts = line.split()
            if not parts or parts[0] != "Q":
                break
            queries.append(
                Query(
                    int(parts[1]),
                    Rect(float(parts[2]), float(parts[3]), float(parts[4]), float(parts[5])),
                )
            )
            line = fp.readline()
        run.batches.append(TickBatch(tick, objects, queries))
    if run.n_ticks != n_ticks:
        raise BadConfig("dataset ended before the declared tick count")
    return run


def save(run: WorkloadRun, path: str) -> None:
    with open(path, "w") as fp:
        write_run(run, fp)


def load(path: str) -> WorkloadRun:
    with open(path) as fp:
        return read_run(fp)
