"""Command-line entry points: ``sutp solve|generate|validate|enumerate-paths|analyze|export-gantt|bench``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from sutp.cp.search import Status
from sutp.generator import GRID_SIZES, SEEDS_PER_SIZE, GeneratorConfig, generate_instance, grid_seed
from sutp.io import (
    SchemaError,
    read_instance,
    read_port,
    read_solution,
    write_gantt,
    write_instance,
    write_solution,
    write_trace,
)
from sutp.lns import DESTROY_ORDERS, LnsConfig, solve
from sutp.model import UNARY_VARIANTS
from sutp.reference_port import build_reference_port
from sutp.topology import enumerate_feasible_paths, max_unit_capacity_flow, naive_upper_bound
from sutp.validator import StructuralError, validate

EXIT_OK, EXIT_ERROR, EXIT_NO_SOLUTION, EXIT_INFEASIBLE = 0, 1, 2, 3
SEED_ENV = "SUTP_SEED"


def _lns_pair(text: str) -> tuple[int, int]:
    try:
        factor, k = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected FACTOR,K such as 25,10") from None
    if factor < 1 or k < 1:
        raise argparse.ArgumentTypeError("FACTOR and K must be positive")
    return factor, k


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_port_args(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--port", type=Path, help="port JSON file")
    g.add_argument("--reference-port", action="store_true", help="use the built-in reference port")


def _port(args, default_reference: bool = False):
    if args.port is not None:
        return read_port(args.port)
    if args.reference_port or default_reference:
        return build_reference_port()
    return None


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env else args.seed


def _solve_args(p: argparse.ArgumentParser):
    p.add_argument("--time-limit", type=_positive_float, default=180.0, help="seconds (default 180)")
    p.add_argument("--unary", choices=UNARY_VARIANTS, default="single")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lns", type=_lns_pair, default=(25, 10), metavar="FACTOR,K",
                   help="LNS with failure limit FACTOR*luby(i) and K trains per destroy")
    g.add_argument("--no-lns", action="store_true", help="plain branch and bound")
    p.add_argument("--seed", type=int, default=0, help=f"random seed ({SEED_ENV} overrides)")
    p.add_argument("--destroy-order", choices=DESTROY_ORDERS, default="start")
    p.add_argument("--max-iterations", type=int, default=None,
                   help="stop LNS after this many repairs")


def _lns_config(args) -> LnsConfig | None:
    if args.no_lns:
        return None
    factor, k = args.lns
    return LnsConfig(factor, k, args.time_limit, _seed(args), args.destroy_order,
                     args.max_iterations)


# ----------------------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    instance = read_instance(args.instance, _port(args))
    trace_rows = []
    outcome = solve(instance, args.unary, _lns_config(args), args.time_limit,
                    on_trace=trace_rows.append)
    st = outcome.stats
    print(f"status {outcome.status.value}")
    print(f"makespan {outcome.makespan if outcome.makespan is not None else '-'}")
    print(f"failures {st.failures} nodes {st.nodes} solutions {st.solutions} "
          f"restarts {st.restarts} wall_ms {st.wall_time_ms}")
    if outcome.infeasible_train:
        print(f"infeasible unit train {outcome.infeasible_train}")
    if args.trace:
        with open(args.trace, "w", newline="") as f:
            write_trace(trace_rows, f)
    if outcome.schedule is not None:
        out = args.out or Path(args.instance).with_suffix(".solution.json")
        write_solution(outcome.schedule, out)
        print(f"solution written to {out}")
        return EXIT_OK
    if outcome.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_NO_SOLUTION


def cmd_generate(args) -> int:
    port = _port(args, default_reference=True)
    mode = "reference" if args.port is None else "embed"
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.big_trains is not None:
        plan = [(args.big_trains, k, args.seed + k) for k in range(args.count)]
    else:
        sizes = args.sizes or GRID_SIZES
        plan = [(n, k, grid_seed(n, k)) for n in sizes for k in range(args.seeds)]
    manifest = []
    for n, k, seed in plan:
        instance = generate_instance(port, GeneratorConfig(n, seed))
        name = f"sutp_{n:02d}_{k:02d}.json"
        write_instance(instance, out / name, mode)
        manifest.append({"file": name, "bigTrains": n, "seed": seed,
                         "unitTrains": len(instance.units), "horizon": instance.horizon})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"{len(manifest)} instances written to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = read_instance(args.instance, _port(args))
    schedule = read_solution(args.solution)
    try:
        report = validate(instance, schedule)
    except StructuralError as e:
        print(f"structural error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if report.ok:
        print(f"ok: {len(schedule.trains)} unit trains, makespan {schedule.makespan}")
        return EXIT_OK
    for v in report.violations:
        print(v)
    print(f"{len(report.violations)} violations")
    return EXIT_NO_SOLUTION


def cmd_enumerate_paths(args) -> int:
    port = _port(args, default_reference=True)
    flows = enumerate_feasible_paths(port, args.train_type, args.cargo_type, args.height_class)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["path_id", "dumper", "conveyors", "stacker", "train_types"])
    for f in flows:
        writer.writerow([f.path_id, f.dumper_id, " ".join(f.conveyor_ids), f.stacker_id,
                         " ".join(sorted(f.train_types))])
    counts = Counter(t for f in flows for t in f.train_types)
    print(f"# total {len(flows)}")
    for t in sorted(counts):
        print(f"# {t} {counts[t]}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    port = _port(args, default_reference=True)
    print(f"dumpers {len(port.dumpers)} conveyors {len(port.conveyors)} "
          f"stackers {len(port.stackers)} stockpiles {len(port.stockpiles)}")
    print(f"paths {len(enumerate_feasible_paths(port))}")
    print(f"max_flow {max_unit_capacity_flow(port)}")
    print(f"naive_upper_bound {naive_upper_bound(port, args.horizon_hours):.2f}")
    return EXIT_OK


def cmd_export_gantt(args) -> int:
    instance = read_instance(args.instance, _port(args))
    schedule = read_solution(args.solution)
    if args.out:
        with open(args.out, "w", newline="") as f:
            write_gantt(instance, schedule, f)
    else:
        write_gantt(instance, schedule, sys.stdout)
    return EXIT_OK


def _bench_one(job):
    path, port_path, reference, unary, lns, time_limit = job
    port = read_port(port_path) if port_path else (build_reference_port() if reference else None)
    instance = read_instance(path, port)
    started = time.perf_counter()
    outcome = solve(instance, unary, lns, time_limit)
    wall = int((time.perf_counter() - started) * 1000)
    ok = outcome.schedule is not None and validate(instance, outcome.schedule).ok
    return {"instance": Path(path).name, "units": len(instance.units),
            "status": outcome.status.value,
            "makespan": "" if outcome.makespan is None else outcome.makespan,
            "wall_ms": wall, "valid": int(ok)}


def cmd_bench(args) -> int:
    files = sorted(p for p in Path(args.instances).glob("*.json") if p.name != "manifest.json")
    lns = _lns_config(args)
    jobs = [(str(p), str(args.port) if args.port else None, args.reference_port, args.unary,
             lns, args.time_limit) for p in files]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=list(rows[0]) if rows else ["instance"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


# ----------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sutp", description="Train unloading scheduler")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("instance", type=Path)
    _add_port_args(p)
    _solve_args(p)
    p.add_argument("--out", type=Path, help="solution JSON (default: next to the instance)")
    p.add_argument("--trace", type=Path, help="incumbent trace CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="generate random instances")
    _add_port_args(p)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")],
                   help=f"big-train counts (default {','.join(map(str, GRID_SIZES))})")
    p.add_argument("--seeds", type=int, default=SEEDS_PER_SIZE, help="instances per size")
    p.add_argument("--big-trains", type=int, help="a single size instead of the grid")
    p.add_argument("--count", type=int, default=1, help="instances with --big-trains")
    p.add_argument("--seed", type=int, default=0, help="first seed with --big-trains")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check a solution against an instance")
    p.add_argument("instance", type=Path)
    p.add_argument("solution", type=Path)
    _add_port_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("enumerate-paths", help="list the feasible equipment paths")
    _add_port_args(p)
    p.add_argument("--train-type")
    p.add_argument("--cargo-type")
    p.add_argument("--height-class")
    p.set_defaults(func=cmd_enumerate_paths)

    p = sub.add_parser("analyze", help="max flow and naive throughput bound")
    _add_port_args(p)
    p.add_argument("--horizon-hours", type=float, default=24.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("export-gantt", help="CSV rows for Gantt charts")
    p.add_argument("instance", type=Path)
    p.add_argument("solution", type=Path)
    _add_port_args(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_export_gantt)

    p = sub.add_parser("bench", help="solve every instance of a directory")
    p.add_argument("instances", type=Path)
    _add_port_args(p)
    _solve_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
