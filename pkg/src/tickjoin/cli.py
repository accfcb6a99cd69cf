"""Command-line front end: workload generation, benchmark runs, oracle dumps.

`generate` writes a dataset in the tickjoin-v1 text format, `run` executes
one method (or a study preset expanding to several) over a dataset and emits
one CSV row per tick, `oracle` dumps the brute-force results byte-stably.
Exit codes: 0 ok, 1 verification failure, 2 bad flags/config, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from typing import Optional, Sequence, TextIO

from .engine import Engine, MethodConfig, QosParams, RunReport, min_bandwidth
from .errors import BadConfig, BadQos, VerificationFailure
from .oracle import brute_force_join
from .workload import WorkloadConfig, generate, load, save

CSV_COLUMNS = [
    "tick",
    "method",
    "containment_tests",
    "subq_intersecting",
    "subq_covering",
    "covering_result_fraction",
    "occupancy_mean",
    "dispersion",
    "imbalance",
    "sync_ops",
    "results_total",
    "t_index_s",
    "t_filter_s",
    "t_decode_s",
    "t_total_s",
    "qos_pass",
]

TIMING_COLUMNS = [c for c in CSV_COLUMNS if c.startswith("t_")]

STUDIES = {
    "s1": "bitmap encoding vs synchronized appends (UG vs UG_Baseline)",
    "s2": "covering subqueries optimization on vs off",
    "s3": "task scheduling policies",
    "s4": "uniform grid split-factor sweep",
    "s5": "quadtree occupancy threshold sensitivity",
    "s6": "distribution skew statistics (UG vs QUAD)",
    "s7": "method comparison under the dataset's distribution",
    "s8": "system bandwidth",
}


def _parse_sweep(text: str) -> tuple[int, int, int]:
    try:
        lo, hi, step = (int(p) for p in text.split(":"))
    except ValueError as exc:
        raise BadConfig(f"--sweep expects lo:hi:step, got {text!r}") from exc
    if lo < 1 or hi < lo or step < 1:
        raise BadConfig(f"bad sweep range {text!r}")
    return lo, hi, step


def _parse_qos(text: str) -> tuple[float, float]:
    try:
        dt, lam = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise BadConfig(f"--qos expects delta_t,lambda, got {text!r}") from exc
    return dt, lam


def _parse_query_side(text: str):
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 2:
            return (float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise BadConfig(f"--query-side expects SIDE or LO:HI, got {text!r}")


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TICKJOIN_WORKERS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tickjoin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic workload dataset")
    g.add_argument("--dist", choices=("uniform", "gaussian", "network"), default="uniform")
    g.add_argument("--objects", type=int, required=True)
    g.add_argument("--ticks", type=int, default=30)
    g.add_argument("--region", type=float, default=22500.0)
    g.add_argument("--speed", type=float, default=200.0)
    g.add_argument("--rate", type=float, default=1.0)
    g.add_argument("--query-side", default="200:800", help="fixed side or LO:HI range (u)")
    g.add_argument("--hotspots", type=int, default=25)
    g.add_argument("--sigma", type=float, default=None)
    g.add_argument("--grid-degree", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run a method (or study preset) over a dataset")
    r.add_argument("dataset")
    r.add_argument("--method", choices=("ug", "ug-baseline", "quad"), default="quad")
    r.add_argument("--split-factor", type=int, default=None)
    r.add_argument("--sweep", default=None, help="lo:hi:step candidate split factors")
    r.add_argument("--th-quad", type=int, default=384)
    r.add_argument("--l-max", type=int, default=12)
    r.add_argument("--covering", choices=("on", "off"), default="on")
    r.add_argument("--schedule", choices=("unordered", "heaviest"), default="heaviest")
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--chunk", type=int, default=64)
    r.add_argument("--rebuild", choices=("every-tick", "adaptive"), default="every-tick")
    r.add_argument("--verify", action="store_true", help="compare every tick with the oracle")
    r.add_argument("--study", choices=sorted(STUDIES), default=None)
    r.add_argument("--qos", default=None, help="delta_t,lambda (seconds)")
    r.add_argument("--csv", default=None, help="write rows to this path instead of stdout")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="dump brute-force results for a dataset")
    o.add_argument("dataset")
    o.add_argument("-o", "--output", default=None)
    o.set_defaults(func=cmd_oracle)
    return parser


def cmd_generate(args: argparse.Namespace) -> int:
    config = WorkloadConfig(
        n_objects=args.objects,
        n_ticks=args.ticks,
        region_side=args.region,
        max_speed=args.speed,
        query_rate=args.rate,
        query_side=_parse_query_side(args.query_side),
        distribution=args.dist,
        n_hotspots=args.hotspots,
        sigma=args.sigma,
        grid_degree=args.grid_degree,
        seed=args.seed,
    )
    run = generate(config)
    save(run, args.output)
    queries = sum(len(b.queries) for b in run.batches)
    print(
        f"wrote {args.output}: {run.n_ticks} ticks, {run.n_objects} objects, "
        f"{queries} queries, dist={args.dist}, seed={args.seed}"
    )
    return 0


def _base_config(args: argparse.Namespace) -> MethodConfig:
    return MethodConfig(
        method=args.method.replace("-", "_"),
        split_factor=args.split_factor,
        sweep=_parse_sweep(args.sweep) if args.sweep else None,
        th_quad=args.th_quad,
        l_max=args.l_max,
        covering_optimization=args.covering == "on",
        schedule="heaviest_first" if args.schedule == "heaviest" else "unordered",
        n_workers=args.workers if args.workers is not None else _default_workers(),
        chunk_size=args.chunk,
        rebuild=args.rebuild.replace("-", "_"),
    )


def _study_configs(args: argparse.Namespace) -> list[MethodConfig]:
    base = _base_config(args)
    mk = dataclasses.replace
    study = args.study
    if study == "s1":
        return [mk(base, method="ug", label="ug"), mk(base, method="ug_baseline", label="ug_baseline")]
    if study == "s2":
        return [
            mk(base, method="quad", covering_optimization=True, label="quad/cov=on"),
            mk(base, method="quad", covering_optimization=False, label="quad/cov=off"),
        ]
    if study == "s3":
        m = base.method
        return [
            mk(base, schedule="heaviest_first", label=f"{m}/sched=heaviest"),
            mk(base, schedule="unordered", label=f"{m}/sched=unordered"),
        ]
    if study == "s4":
        return [mk(base, method="ug", split_factor=None, label="ug/sweep")]
    if study == "s5":
        return [
            mk(base, method="quad", th_quad=th, label=f"quad/th={th}") for th in (96, 192, 384, 768)
        ]
    if study in ("s6", "s7"):
        return [
            mk(base, method="ug", split_factor=args.split_factor, label="ug"),
            mk(base, method="quad", label="quad"),
        ]
    if study == "s8":
        return [mk(base, method="quad", label="quad")]
    raise BadConfig(f"unknown study {study!r}")


def _write_rows(report: RunReport, writer) -> None:
    for s in report.stats:
        d = s.durations
        writer.writerow(
            [
                s.tick,
                s.method,
                s.containment_tests,
                s.subq_intersecting,
                s.subq_covering,
                repr(round(s.covering_result_fraction, 9)),
                repr(round(s.occupancy_mean, 9)),
                repr(round(s.dispersion, 9)),
                repr(round(s.imbalance, 9)),
                s.sync_ops,
                s.results_total,
                f"{d.get('index', 0.0):.6f}",
                f"{d.get('filter', 0.0):.6f}",
                f"{d.get('decode', 0.0):.6f}",
                f"{d.get('total', 0.0):.6f}",
                "" if s.qos_pass is None else int(s.qos_pass),
            ]
        )


def _echo_manifest(args: argparse.Namespace, workload) -> None:
    print(
        f"manifest: dataset={args.dataset} ticks={workload.n_ticks} "
        f"objects={workload.n_objects} method={args.method} study={args.study or '-'} "
        f"split_factor={args.split_factor or (args.sweep and 'sweep') or '-'} "
        f"th_quad={args.th_quad} covering={args.covering} schedule={args.schedule} "
        f"workers={args.workers or _default_workers()} chunk={args.chunk} "
        f"qos={args.qos or '-'} verify={args.verify} csv={args.csv or '-'}",
        file=sys.stderr,
    )


def cmd_run(args: argparse.Namespace) -> int:
    workload = load(args.dataset)
    _echo_manifest(args, workload)
    if args.study:
        configs = _study_configs(args)
        print(f"study {args.study}: {STUDIES[args.study]}", file=sys.stderr)
        for cfg in configs:
            print(
                f"  -> {cfg.name}: method={cfg.method} "
                f"covering={'on' if cfg.covering_optimization else 'off'} "
                f"schedule={cfg.schedule} th_quad={cfg.th_quad} "
                f"split_factor={cfg.split_factor or 'sweep'}",
                file=sys.stderr,
            )
    else:
        configs = [_base_config(args)]

    qos = None
    if args.qos:
        dt, lam = _parse_qos(args.qos)
        qos = QosParams(delta_t=dt, lam=lam, q_max=workload.max_queries_per_tick)

    out: TextIO
    close_out = False
    if args.csv:
        out = open(args.csv, "w", newline="")
        close_out = True
    else:
        out = sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(CSV_COLUMNS)
        for cfg in configs:
            engine = Engine(cfg)
            try:
                report = engine.run(workload, qos=qos, verify=args.verify)
            except VerificationFailure as exc:
                print(f"verification FAILED: {exc}", file=sys.stderr)
                return 1
            if report.sweep_costs is not None:
                print(f"{cfg.name}: swept split factor = {engine.split_factor}", file=sys.stderr)
            if qos is not None:
                try:
                    need = min_bandwidth(qos)
                except BadQos as exc:
                    raise BadConfig(str(exc)) from exc
                print(
                    f"{cfg.name}: bandwidth = {report.bandwidth:.1f} queries/s, "
                    f"required >= {need:.1f} for q_max={qos.q_max}",
                    file=sys.stderr,
                )
            _write_rows(report, writer)
    finally:
        if close_out:
            out.close()
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    workload = load(args.dataset)
    lines: list[str] = []
    for batch in workload.batches:
        lines.append(f"# tick {batch.tick_index}")
        lines.extend(brute_force_join(batch).lines())
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BadConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
