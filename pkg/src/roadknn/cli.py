"""Command-line front end and benchmark harness.

Subcommands: build, query, update, verify, sweep. Exit codes: 0 on
success, 2 when verification finds violations, 1 on usage or IO
errors. All randomness is seeded; every CSV cell except wall-clock
columns is reproducible from the seeds.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field

from . import bundle as bundle_mod
from .bundle import build_bundle, load_bundle, save_bundle
from .errors import RoadKnnError
from .graph import (
    RoadNetwork,
    generate_grid,
    load_objects,
    parse_dimacs_gr,
    sample_objects,
    serialize_objects,
)
from .maintenance import delete_object, insert_object
from .oracle import verify_bn_graph, verify_index
from .query import knn_query


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _load_graph(path: str) -> RoadNetwork:
    with open(path, "r") as fh:
        return parse_dimacs_gr(fh.read())


def _resolve_objects(net, args):
    if args.objects:
        with open(args.objects, "r") as fh:
            objs = load_objects(fh.read(), net)
        return objs
    if args.density is None:
        raise RoadKnnError("supply either --objects or --density")
    return sample_objects(net, args.density, args.seed)


def cmd_build(args) -> int:
    net = _load_graph(args.graph)
    objects = _resolve_objects(net, args)
    t0 = time.perf_counter()
    bundle = build_bundle(net, objects, args.k, args.algorithm)
    build_s = time.perf_counter() - t0
    if args.with_eta:
        bundle.bn.compute_eta()
    bundle_bytes = save_bundle(args.bundle, bundle)
    s = bundle.bn.stats
    bs = bundle.index.build_stats
    payload = bundle_mod.index_payload_bytes(bundle.index)
    eta = "-" if s.eta is None else s.eta
    print(
        f"build: algorithm={args.algorithm} n={net.n} m={net.m} k={args.k} "
        f"objects={objects.size} time_s={build_s:.3f}"
    )
    print(
        f"stats: rho={s.rho} tau={s.tau} tau_prime={s.tau_prime} eta={eta} "
        f"sssp_invocations={bs.sssp_invocations} "
        f"edges_inserted={s.edges_inserted} edges_removed={s.edges_removed}"
    )
    print(
        f"index: entries={bundle.index.total_entries()} payload_bytes={payload} "
        f"bundle_bytes={bundle_bytes}"
    )
    if args.csv:
        _write_csv(
            args.csv,
            ["n", "m", "k", "objects", "algorithm", "build_s", "rho", "tau",
             "tau_prime", "eta", "sssp_invocations", "index_payload_bytes"],
            [[net.n, net.m, args.k, objects.size, args.algorithm,
              f"{build_s:.6f}", s.rho, s.tau, s.tau_prime,
              "" if s.eta is None else s.eta, bs.sssp_invocations, payload]],
        )
    return 0


def _percentile(sorted_vals, q: float):
    if not sorted_vals:
        return 0
    idx = min(len(sorted_vals) - 1, int(q * len(sorted_vals)))
    return sorted_vals[idx]


def cmd_query(args) -> int:
    bundle = load_bundle(args.bundle)
    index = bundle.index
    n = bundle.n
    if args.queries:
        with open(args.queries, "r") as fh:
            vertices = []
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                v = int(line) - 1
                if not (0 <= v < n):
                    raise RoadKnnError(f"query vertex {line} out of range (line {lineno})")
                vertices.append(v)
    else:
        import random as _random

        rng = _random.Random(args.seed)
        vertices = [rng.randrange(n) for _ in range(args.random)]
    if not vertices:
        raise RoadKnnError("no query vertices")
    k_prime = args.kprime if args.kprime is not None else bundle.k

    # Warmup pass, excluded from timing.
    for v in vertices[: min(100, len(vertices))]:
        knn_query(index, v, k_prime)

    if args.threads > 1:
        # Concurrent readers over the immutable index: throughput only
        # (per-query percentiles are a single-thread measurement).
        import threading

        def worker(vs):
            for _ in range(args.repeat):
                for v in vs:
                    knn_query(index, v, k_prime)

        chunks = [vertices[i :: args.threads] for i in range(args.threads)]
        threads = [threading.Thread(target=worker, args=(c,)) for c in chunks]
        t0 = time.perf_counter_ns()
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        elapsed = (time.perf_counter_ns() - t0) / 1e9
        total = len(vertices) * args.repeat
        print(
            f"query: n={n} k={bundle.k} k_prime={k_prime} queries={total} "
            f"threads={args.threads} throughput_qps={total / elapsed:.0f}"
        )
        return 0

    latencies = []
    index.touches = 0
    t_all0 = time.perf_counter_ns()
    for _ in range(args.repeat):
        for v in vertices:
            t0 = time.perf_counter_ns()
            knn_query(index, v, k_prime)
            latencies.append(time.perf_counter_ns() - t0)
    t_all = time.perf_counter_ns() - t_all0
    touches = index.touches
    count = len(latencies)
    latencies.sort()
    mean_ns = sum(latencies) / count
    p50 = _percentile(latencies, 0.50)
    p99 = _percentile(latencies, 0.99)
    mu = bundle.objects.size / n
    print(
        f"query: n={n} k={bundle.k} k_prime={k_prime} queries={count} "
        f"mean_ns={mean_ns:.0f} p50_ns={p50} p99_ns={p99} "
        f"touches={touches} throughput_qps={count / (t_all / 1e9):.0f}"
    )
    if args.csv:
        _write_csv(
            args.csv,
            ["k_prime", "mu", "n", "mean_ns", "p50_ns", "p99_ns", "touches"],
            [[k_prime, f"{mu:.6f}", n, f"{mean_ns:.1f}", p50, p99, touches]],
        )
    return 0


def _parse_update_script(text: str, n: int):
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line[0] not in "+-" or not line[1:].strip().isdigit():
            raise RoadKnnError(f"update script line {lineno}: expected +<id> or -<id>, got {line!r}")
        v = int(line[1:]) - 1
        if not (0 <= v < n):
            raise RoadKnnError(f"update script line {lineno}: vertex {line[1:]} out of range")
        ops.append((line[0], v))
    if not ops:
        raise RoadKnnError("update script is empty")
    return ops


def cmd_update(args) -> int:
    bundle = load_bundle(args.bundle)
    with open(args.script, "r") as fh:
        ops = _parse_update_script(fh.read(), bundle.n)
    latencies = []
    deltas = []
    rows = []
    for sign, v in ops:
        t0 = time.perf_counter_ns()
        if sign == "+":
            report = insert_object(bundle.bn, bundle.index, bundle.objects, v,
                                   bundle.partial)
        else:
            report = delete_object(bundle.bn, bundle.index, bundle.objects, v,
                                   bundle.partial)
        dt = time.perf_counter_ns() - t0
        latencies.append(dt)
        deltas.append(report.affected_count)
        rows.append([report.operation, v + 1, report.affected_count,
                     report.frontier_visits, dt])
    out = args.out or args.bundle
    save_bundle(out, bundle)
    if args.objects:
        with open(args.objects, "w") as fh:
            fh.write(serialize_objects(bundle.objects))
    lat_sorted = sorted(latencies)
    print(
        f"update: ops={len(ops)} mean_us={sum(latencies) / len(ops) / 1000:.1f} "
        f"p50_us={_percentile(lat_sorted, 0.5) / 1000:.1f} "
        f"p99_us={_percentile(lat_sorted, 0.99) / 1000:.1f} "
        f"mean_delta={sum(deltas) / len(deltas):.1f} max_delta={max(deltas)} "
        f"objects={bundle.objects.size}"
    )
    if args.csv:
        _write_csv(args.csv,
                   ["operation", "vertex", "delta", "frontier_visits", "ns"],
                   rows)
    return 0


def cmd_verify(args) -> int:
    bundle = load_bundle(args.bundle)
    net = _load_graph(args.graph)
    bundle.check_graph(net)
    if args.objects:
        with open(args.objects, "r") as fh:
            objs = load_objects(fh.read(), net)
        if objs != bundle.objects:
            print("verify: FAIL object set differs from bundle", file=sys.stderr)
            return 2
    bn_report = verify_bn_graph(net, bundle.bn, seed=args.seed)
    idx_report = verify_index(net, bundle.objects, bundle.k, bundle.index)
    ok = bn_report.ok and idx_report.ok
    print(f"verify: pruned-graph checked={bn_report.checked} "
          f"violations={bn_report.violation_count}")
    print(f"verify: index checked={idx_report.checked} "
          f"violations={idx_report.violation_count}")
    if not ok:
        for report in (bn_report, idx_report):
            for v in report.violations:
                print(f"  [{v.kind}] vertex {v.vertex}: {v.detail}", file=sys.stderr)
        print("verify: FAIL", file=sys.stderr)
        return 2
    print("verify: OK")
    return 0


@dataclass
class SweepConfig:
    """Parameter grid for the sweep command (desk-scale defaults)."""

    out_dir: str = "sweep_out"
    seed: int = 0
    base_rows: int = 32
    base_cols: int = 32
    cells: int = 3
    weight_lo: int = 1
    weight_hi: int = 1000
    ks: list[int] = field(default_factory=lambda: [10, 20, 40])
    densities: list[float] = field(default_factory=lambda: [0.05, 0.01, 0.005])
    default_k: int = 20
    default_density: float = 0.005
    algorithms: list[str] = field(default_factory=lambda: ["bidirectional", "bottomup"])
    query_count: int = 1000
    update_count: int = 200

    @classmethod
    def from_json(cls, path: str) -> "SweepConfig":
        with open(path, "r") as fh:
            raw = json.load(fh)
        cfg = cls()
        for key, value in raw.items():
            if not hasattr(cfg, key):
                raise RoadKnnError(f"unknown sweep config key {key!r}")
            setattr(cfg, key, value)
        return cfg


def _grid_for_cell(cfg: SweepConfig, c: int) -> RoadNetwork:
    return generate_grid(cfg.base_rows * c, cfg.base_cols * c,
                         (cfg.weight_lo, cfg.weight_hi), cfg.seed + c)


def cmd_sweep(args) -> int:
    import os
    import random as _random

    cfg = SweepConfig.from_json(args.config) if args.config else SweepConfig()
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if args.seed is not None:
        cfg.seed = args.seed
    os.makedirs(cfg.out_dir, exist_ok=True)

    # Experiment 1: index construction across grid sizes and algorithms.
    build_rows = []
    largest = None
    for c in range(1, cfg.cells + 1):
        net = _grid_for_cell(cfg, c)
        objects = sample_objects(net, cfg.default_density, cfg.seed)
        for algorithm in cfg.algorithms:
            t0 = time.perf_counter()
            bundle = build_bundle(net, objects, cfg.default_k, algorithm)
            dt = time.perf_counter() - t0
            s = bundle.bn.stats
            build_rows.append([
                net.n, net.m, cfg.default_k, objects.size, algorithm,
                f"{dt:.6f}", s.rho, s.tau, s.tau_prime,
                bundle.index.build_stats.sssp_invocations,
                bundle_mod.index_payload_bytes(bundle.index),
            ])
            largest = (net, objects, bundle)
    _write_csv(
        os.path.join(cfg.out_dir, "exp_build.csv"),
        ["n", "m", "k", "objects", "algorithm", "build_s", "rho", "tau",
         "tau_prime", "sssp_invocations", "index_payload_bytes"],
        build_rows,
    )

    net, objects, bundle = largest
    rng = _random.Random(cfg.seed)
    queries = [rng.randrange(net.n) for _ in range(cfg.query_count)]

    # Experiment 2: query latency across k' on the largest grid.
    k_rows = []
    big_k = max(cfg.ks + [cfg.default_k])
    big_bundle = build_bundle(net, objects, big_k, cfg.algorithms[0])
    mu = objects.size / net.n
    for k_prime in cfg.ks:
        lats = []
        big_bundle.index.touches = 0
        for v in queries:
            t0 = time.perf_counter_ns()
            knn_query(big_bundle.index, v, k_prime)
            lats.append(time.perf_counter_ns() - t0)
        lats.sort()
        k_rows.append([k_prime, f"{mu:.6f}", net.n,
                       f"{sum(lats) / len(lats):.1f}",
                       _percentile(lats, 0.5), _percentile(lats, 0.99),
                       big_bundle.index.touches])
    _write_csv(
        os.path.join(cfg.out_dir, "exp_query_k.csv"),
        ["k_prime", "mu", "n", "mean_ns", "p50_ns", "p99_ns", "touches"],
        k_rows,
    )

    # Experiment 3: query latency across object density (rebuild per density).
    d_rows = []
    for density in cfg.densities:
        objs = sample_objects(net, density, cfg.seed)
        b = build_bundle(net, objs, cfg.default_k, cfg.algorithms[0])
        lats = []
        b.index.touches = 0
        for v in queries:
            t0 = time.perf_counter_ns()
            knn_query(b.index, v, cfg.default_k)
            lats.append(time.perf_counter_ns() - t0)
        lats.sort()
        d_rows.append([cfg.default_k, f"{objs.size / net.n:.6f}", net.n,
                       f"{sum(lats) / len(lats):.1f}",
                       _percentile(lats, 0.5), _percentile(lats, 0.99),
                       b.index.touches])
    _write_csv(
        os.path.join(cfg.out_dir, "exp_query_density.csv"),
        ["k_prime", "mu", "n", "mean_ns", "p50_ns", "p99_ns", "touches"],
        d_rows,
    )

    # Experiment 4: alternating random updates on the default bundle.
    u_rows = []
    in_set = set(bundle.objects)
    candidates = [v for v in range(net.n)]
    count = 0
    while count < cfg.update_count:
        v = rng.choice(candidates)
        if v in in_set:
            if len(in_set) < 2:
                continue
            t0 = time.perf_counter_ns()
            report = delete_object(bundle.bn, bundle.index, bundle.objects, v,
                                   bundle.partial)
            dt = time.perf_counter_ns() - t0
            in_set.discard(v)
        else:
            t0 = time.perf_counter_ns()
            report = insert_object(bundle.bn, bundle.index, bundle.objects, v,
                                   bundle.partial)
            dt = time.perf_counter_ns() - t0
            in_set.add(v)
        u_rows.append([report.operation, v + 1, report.affected_count,
                       report.frontier_visits, dt])
        count += 1
    _write_csv(
        os.path.join(cfg.out_dir, "exp_update.csv"),
        ["operation", "vertex", "delta", "frontier_visits", "ns"],
        u_rows,
    )
    print(f"sweep: wrote 4 CSV files to {cfg.out_dir}")
    return 0


def make_parser() -> _Parser:
    parser = _Parser(prog="roadknn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_build = sub.add_parser("build",
                             help="build an index bundle from a DIMACS graph")
    p_build.add_argument("--graph", required=True, help="DIMACS .gr file")
    p_build.add_argument("--objects", help="object list file (1-based ids)")
    p_build.add_argument("--density", type=float, help="sample objects at this density")
    p_build.add_argument("--seed", type=int, default=0)
    p_build.add_argument("--k", type=int, default=20)
    p_build.add_argument("--algorithm", choices=["bottomup", "bidirectional"],
                         default="bidirectional")
    p_build.add_argument("--bundle", required=True, help="output bundle path")
    p_build.add_argument("--csv", help="write a one-row build CSV here")
    p_build.add_argument("--with-eta", action="store_true",
                         help="also compute the ascending-reach statistic")
    p_build.set_defaults(func=cmd_build)

    p_query = sub.add_parser("query",
                             help="run kNN queries against a bundle")
    p_query.add_argument("--bundle", required=True)
    p_query.add_argument("--queries", help="file of 1-based query vertex ids")
    p_query.add_argument("--random", type=int, default=1000,
                         help="number of random query vertices")
    p_query.add_argument("--seed", type=int, default=0)
    p_query.add_argument("--kprime", type=int, help="neighbors per query (default: bundle k)")
    p_query.add_argument("--repeat", type=int, default=1)
    p_query.add_argument("--threads", type=int, default=1,
                         help="concurrent readers (throughput mode when > 1)")
    p_query.add_argument("--csv")
    p_query.set_defaults(func=cmd_query)

    p_update = sub.add_parser("update",
                              help="apply +id/-id object updates to a bundle")
    p_update.add_argument("--bundle", required=True)
    p_update.add_argument("--script", required=True,
                          help="file of +<id> / -<id> lines (1-based)")
    p_update.add_argument("--objects", help="write the updated object list here")
    p_update.add_argument("--out", help="write the updated bundle here (default: in place)")
    p_update.add_argument("--csv")
    p_update.set_defaults(func=cmd_update)

    p_verify = sub.add_parser("verify",
                              help="verify a bundle against the Dijkstra oracle")
    p_verify.add_argument("--bundle", required=True)
    p_verify.add_argument("--graph", required=True)
    p_verify.add_argument("--objects")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep",
                             help="run the benchmark parameter grid, one CSV per experiment")
    p_sweep.add_argument("--config", help="JSON file overriding SweepConfig fields")
    p_sweep.add_argument("--out-dir")
    p_sweep.add_argument("--seed", type=int)
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except RoadKnnError as exc:
        print(f"roadknn: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"roadknn: io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
