"""Depth-first branch and bound over binary decisions."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from sutp.cp.kernel import Inconsistent, Solver


def luby(i: int) -> int:
    """i-th term (1-based) of the Luby sequence 1,1,2,1,1,2,4,1,1,2,..."""
    if i < 1:
        raise ValueError("luby index starts at 1")
    while True:
        k = i.bit_length()
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    FEASIBLE = "feasible"        # limit reached with an incumbent
    UNKNOWN = "unknown"          # limit reached without one


@dataclass
class Decision:
    """A binary choice point: ``left`` then, on failure, ``right``."""

    left: Callable[[], None]
    right: Optional[Callable[[], None]]
    label: str = ""


class Brancher(Protocol):
    def next_decision(self) -> Decision | None:
        ...


@dataclass
class Limits:
    time_limit: float | None = None      # seconds
    fail_limit: int | None = None
    node_limit: int | None = None
    first_solution: bool = False
    deadline: float | None = None        # absolute perf_counter time

    def resolve_deadline(self, now: float) -> float | None:
        ends = [d for d in (self.deadline,
                            None if self.time_limit is None else now + self.time_limit)
                if d is not None]
        return min(ends) if ends else None


@dataclass
class SearchStats:
    failures: int = 0
    nodes: int = 0
    solutions: int = 0
    restarts: int = 0
    best_makespan: int | None = None
    wall_time_ms: int = 0

    def absorb(self, other: "SearchStats") -> None:
        self.failures += other.failures
        self.nodes += other.nodes
        self.solutions += other.solutions
        self.restarts += other.restarts


@dataclass
class SearchResult:
    status: Status
    solution: list[int] | None
    objective: int | None
    stats: SearchStats = field(default_factory=SearchStats)
    limit_reached: bool = False


def _apply(s: Solver, action: Callable[[], None]) -> bool:
    try:
        action()
    except Inconsistent:
        s.clear_queue()
        return False
    return s.propagate()


def solve_branch_and_bound(s: Solver, brancher: Brancher, objective: int | None,
                           limits: Limits | None = None,
                           on_solution: Callable[[list[int], int | None], None] | None = None,
                           upper_bound: int | None = None) -> SearchResult:
    """Minimise ``objective`` (or just find solutions when it is None).

    Every solution tightens the objective to strictly below the incumbent.
    The solver is returned to its entry state afterwards. ``upper_bound``
    requests solutions strictly better than a known value.
    """
    limits = limits or Limits()
    started = time.perf_counter()
    deadline = limits.resolve_deadline(started)
    stats = SearchStats()
    best: list[int] | None = None
    best_obj: int | None = None
    bound = upper_bound
    entry = s.depth
    s.push()
    stack: list[Decision] = []
    limit_hit = False

    def tighten() -> bool:
        if objective is None or bound is None:
            return True
        return _apply(s, lambda: s.set_max(objective, bound - 1))

    ok = tighten() and s.propagate()
    while True:
        if ok:
            stats.nodes += 1
            if deadline is not None and time.perf_counter() > deadline:
                limit_hit = True
                break
            if limits.node_limit is not None and stats.nodes > limits.node_limit:
                limit_hit = True
                break
            decision = brancher.next_decision()
            if decision is None:
                best = s.snapshot()
                stats.solutions += 1
                if objective is not None:
                    best_obj = s.lo[objective]
                    bound = best_obj
                    stats.best_makespan = best_obj
                if on_solution is not None:
                    on_solution(best, best_obj)
                if limits.first_solution or objective is None:
                    limit_hit = limits.first_solution
                    break
                ok = False
            else:
                s.push()
                stack.append(decision)
                ok = _apply(s, decision.left)
                if not ok:
                    stats.failures += 1
                continue
        # backtrack to the most recent open right branch
        if limits.fail_limit is not None and stats.failures >= limits.fail_limit:
            limit_hit = True
            break
        if deadline is not None and time.perf_counter() > deadline:
            limit_hit = True
            break
        while stack:
            decision = stack.pop()
            s.pop()
            if decision.right is None:
                continue
            ok = tighten() and _apply(s, decision.right)
            if ok:
                break
            stats.failures += 1
        else:
            break
    s.pop_to(entry)
    stats.wall_time_ms = int((time.perf_counter() - started) * 1000)
    if best is None:
        status = Status.UNKNOWN if limit_hit else Status.INFEASIBLE
    else:
        status = Status.FEASIBLE if limit_hit else Status.OPTIMAL
    return SearchResult(status, best, best_obj, stats, limit_hit)
