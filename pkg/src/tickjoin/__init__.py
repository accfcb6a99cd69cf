"""Tick-batched spatial joins over moving objects.

Massive sets of rectangular range queries are evaluated against moving point
objects tick by tick, through interchangeable spatial indices (uniform grid
or PR-quadtree), lock-free bitmap intermediate results, and a decode/merge
stage, with a brute-force oracle and a workload generator for verification
and benchmarking.
"""

from .decode import ResultSet, merge_results
from .engine import Engine, MethodConfig, QosParams, RunReport, TickStats, check_latency, min_bandwidth
from .geometry import MovingObject, Point, Query, Rect, TickBatch, clip, compute_mbr, contains
from .oracle import brute_force_join
from .workload import WorkloadConfig, WorkloadRun, generate

__version__ = "0.1.0"

__all__ = [
    "Engine",
    "MethodConfig",
    "MovingObject",
    "Point",
    "Query",
    "QosParams",
    "Rect",
    "ResultSet",
    "RunReport",
    "TickBatch",
    "TickStats",
    "WorkloadConfig",
    "WorkloadRun",
    "brute_force_join",
    "check_latency",
    "clip",
    "compute_mbr",
    "contains",
    "generate",
    "merge_results",
    "min_bandwidth",
    "__version__",
]
