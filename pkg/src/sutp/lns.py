"""Large neighbourhood search and the top-level solve entry point.

Each LNS iteration frees a window of K trains that are consecutive in the
incumbent's start order (or in arrival order), fixes the path, stockpile and
start of every other train, and re-optimizes the window with branch and bound
under a failure limit of ``luby_factor * luby(iteration)``. Only strictly
better schedules are kept.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from sutp.cp.kernel import Inconsistent
from sutp.cp.search import Limits, SearchStats, Status, luby, solve_branch_and_bound
from sutp.domain import Instance
from sutp.model import ModelInfeasible, SutpModel, build_model, extract_schedule
from sutp.schedule import Schedule
from sutp.strategy import PathThenStart

DESTROY_ORDERS = ("start", "arrival")


@dataclass(frozen=True)
class LnsConfig:
    luby_factor: int = 25
    destroy_length: int = 10
    time_limit: float = 180.0
    seed: int = 0
    destroy_order: str = "start"
    max_iterations: int | None = None

    def __post_init__(self):
        if self.luby_factor < 1 or self.destroy_length < 1:
            raise ValueError("LNS factor and destroy length must be positive")
        if self.destroy_order not in DESTROY_ORDERS:
            raise ValueError(f"destroy order must be one of {DESTROY_ORDERS}")


@dataclass
class TraceRow:
    iteration: int
    elapsed_ms: int
    makespan: int
    window: tuple[str, ...]  # ids of the destroyed unit trains


@dataclass
class SolveOutcome:
    status: Status
    schedule: Schedule | None
    stats: SearchStats
    trace: list[TraceRow] = field(default_factory=list)
    infeasible_train: str | None = None

    @property
    def makespan(self) -> int | None:
        return None if self.schedule is None else self.schedule.makespan


def _stats_dict(stats: SearchStats) -> dict:
    return {"failures": stats.failures, "nodes": stats.nodes, "solutions": stats.solutions,
            "restarts": stats.restarts, "bestMakespan": stats.best_makespan}


def destroy_window(model: SutpModel, values: list[int], k: int, rng: random.Random,
                   order: str = "start") -> list[int]:
    """Indices of K trains consecutive in the chosen order, from a random offset."""
    trains = model.trains
    if order == "start":
        ranked = sorted(trains, key=lambda t: (values[t.start], t.index))
    else:
        arrival = model.instance.big_trains
        ranked = sorted(trains, key=lambda t: (arrival[t.big_index].arrival, t.index))
    n = len(ranked)
    if k >= n:
        return [t.index for t in ranked]
    offset = rng.randrange(n - k + 1)
    return [t.index for t in ranked[offset:offset + k]]


def _fix_others(model: SutpModel, values: list[int], free: set[int]) -> None:
    s = model.solver
    for t in model.trains:
        if t.index in free:
            continue
        s.assign(t.path, values[t.path])
        for b in t.pile.values():
            if values[b]:
                s.assign(b, 1)
        s.assign(t.start, values[t.start])


def lns_solve(model: SutpModel, config: LnsConfig, on_trace=None) -> SolveOutcome:
    """Improve a first solution by repeated destroy and repair."""
    s = model.solver
    started = time.perf_counter()
    deadline = started + config.time_limit
    rng = random.Random(config.seed)
    stats = SearchStats()
    trace: list[TraceRow] = []

    def elapsed_ms():
        return int((time.perf_counter() - started) * 1000)

    first = solve_branch_and_bound(s, PathThenStart(model), model.makespan,
                                   Limits(first_solution=True, deadline=deadline))
    stats.absorb(first.stats)
    if first.solution is None:
        stats.wall_time_ms = elapsed_ms()
        return SolveOutcome(first.status, None, stats)
    best, best_obj = first.solution, first.objective
    lower = s.lo[model.makespan]
    stats.best_makespan = best_obj
    row = TraceRow(0, elapsed_ms(), best_obj, ())
    trace.append(row)
    if on_trace:
        on_trace(row)

    status = Status.FEASIBLE
    n = len(model.trains)
    it = 0
    while best_obj > lower:
        if config.max_iterations is not None and it >= config.max_iterations:
            break
        if time.perf_counter() >= deadline:
            break
        it += 1
        window = destroy_window(model, best, config.destroy_length, rng, config.destroy_order)
        free = set(window)
        s.push()
        try:
            _fix_others(model, best, free)
            ok = s.propagate()
        except Inconsistent:
            s.clear_queue()
            ok = False
        if ok:
            limits = Limits(fail_limit=config.luby_factor * luby(it), deadline=deadline)
            brancher = PathThenStart(model, random.Random(rng.getrandbits(32)))
            res = solve_branch_and_bound(s, brancher, model.makespan, limits, upper_bound=best_obj)
            stats.absorb(res.stats)
            if res.solution is not None and res.objective < best_obj:
                best, best_obj = res.solution, res.objective
                stats.best_makespan = best_obj
                row = TraceRow(it, elapsed_ms(), best_obj,
                               tuple(model.trains[i].id for i in window))
                trace.append(row)
                if on_trace:
                    on_trace(row)
            if len(free) == n and not res.limit_reached:
                s.pop()
                status = Status.OPTIMAL  # the whole model was searched exhaustively
                break
        s.pop()
        stats.restarts += 1
    if best_obj <= lower:
        status = Status.OPTIMAL
    stats.wall_time_ms = elapsed_ms()
    schedule = extract_schedule(model, best, status.value, _stats_dict(stats))
    return SolveOutcome(status, schedule, stats, trace)


def solve(instance: Instance, unary: str = "single", lns: LnsConfig | None = None,
          time_limit: float = 180.0, on_trace=None) -> SolveOutcome:
    """Build the model and run LNS, or plain branch and bound when ``lns`` is None."""
    started = time.perf_counter()
    try:
        model = build_model(instance, unary)
    except ModelInfeasible as e:
        return SolveOutcome(Status.INFEASIBLE, None, SearchStats(), infeasible_train=e.train_id)
    if lns is not None:
        remaining = max(0.0, lns.time_limit - (time.perf_counter() - started))
        cfg = LnsConfig(lns.luby_factor, lns.destroy_length, remaining, lns.seed,
                        lns.destroy_order, lns.max_iterations)
        return lns_solve(model, cfg, on_trace)

    trace: list[TraceRow] = []

    def record(values, objective):
        row = TraceRow(len(trace), int((time.perf_counter() - started) * 1000), objective, ())
        trace.append(row)
        if on_trace:
            on_trace(row)

    res = solve_branch_and_bound(model.solver, PathThenStart(model), model.makespan,
                                 Limits(deadline=started + time_limit), on_solution=record)
    schedule = None
    if res.solution is not None:
        schedule = extract_schedule(model, res.solution, res.status.value, _stats_dict(res.stats))
    return SolveOutcome(res.status, schedule, res.stats, trace)
