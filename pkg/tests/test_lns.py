import random

import pytest

from sutp.cp import Limits, Status, solve_branch_and_bound
from sutp.generator import GeneratorConfig, generate_instance, tiny_instance
from sutp.lns import LnsConfig, _fix_others, destroy_window, lns_solve, solve
from sutp.model import build_model, extract_schedule
from sutp.oracle import brute_force_optimal
from sutp.strategy import PathThenStart
from sutp.validator import validate


@pytest.fixture(scope="module")
def medium(reference_port):
    return generate_instance(reference_port, GeneratorConfig(12, 4242))


@pytest.fixture(scope="module")
def larger(reference_port):
    return generate_instance(reference_port, GeneratorConfig(25, 4))


def test_config_validation():
    with pytest.raises(ValueError):
        LnsConfig(luby_factor=0)
    with pytest.raises(ValueError):
        LnsConfig(destroy_order="random")


def test_trace_is_strictly_decreasing_and_final_schedule_valid(larger):
    rows = []
    out = solve(larger, "single", LnsConfig(25, 10, time_limit=60, seed=1, max_iterations=60),
                on_trace=rows.append)
    assert out.schedule is not None
    assert validate(larger, out.schedule).ok
    assert len(rows) >= 2
    spans = [r.makespan for r in rows]
    assert spans == [r.makespan for r in out.trace]
    assert all(a > b for a, b in zip(spans, spans[1:]))
    assert spans[-1] == out.makespan
    assert out.stats.restarts <= 60
    assert all(len(r.window) == 10 for r in rows[1:])


def test_same_seed_same_trace(larger):
    cfg = LnsConfig(25, 10, time_limit=60, seed=1, max_iterations=60)
    a = solve(larger, "single", cfg)
    b = solve(larger, "single", cfg)
    assert len(a.trace) >= 2
    assert [(r.iteration, r.makespan, r.window) for r in a.trace] == \
        [(r.iteration, r.makespan, r.window) for r in b.trace]
    assert a.schedule.trains == b.schedule.trains


def test_destroy_window_is_consecutive_without_wraparound(medium):
    m = build_model(medium)
    res = solve_branch_and_bound(m.solver, PathThenStart(m), m.makespan,
                                 Limits(first_solution=True))
    values = res.solution
    order = [t.index for t in sorted(m.trains, key=lambda t: (values[t.start], t.index))]
    rng = random.Random(0)
    for _ in range(200):
        w = destroy_window(m, values, 6, rng)
        i = order.index(w[0])
        assert w == order[i:i + 6]
    assert sorted(destroy_window(m, values, 10 ** 6, rng)) == sorted(order)


def test_repair_keeps_the_other_trains(medium):
    m = build_model(medium)
    s = m.solver
    first = solve_branch_and_bound(s, PathThenStart(m), m.makespan, Limits(first_solution=True))
    best = first.solution
    window = destroy_window(m, best, 5, random.Random(3))
    s.push()
    _fix_others(m, best, set(window))
    assert s.propagate()
    res = solve_branch_and_bound(s, PathThenStart(m, random.Random(1)), m.makespan,
                                 Limits(fail_limit=500))
    s.pop()
    assert res.solution is not None
    new = extract_schedule(m, res.solution).by_id()
    old = extract_schedule(m, best).by_id()
    freed = {m.trains[i].id for i in window}
    for tid, a in old.items():
        if tid not in freed:
            b = new[tid]
            assert (a.path_id, a.stockpile, a.start) == (b.path_id, b.stockpile, b.start)
    assert validate(medium, extract_schedule(m, res.solution)).ok


@pytest.mark.parametrize("seed", range(10))
def test_full_window_reaches_the_optimum(seed):
    inst = tiny_instance(seed)
    best, _ = brute_force_optimal(inst)
    out = solve(inst, "single", LnsConfig(1000, 100, time_limit=30, seed=seed))
    if best is None:
        assert out.schedule is None
        return
    assert out.status is Status.OPTIMAL
    assert out.makespan == best


def test_arrival_order_windows(medium):
    out = solve(medium, "single", LnsConfig(25, 5, time_limit=20, seed=2, destroy_order="arrival",
                                            max_iterations=20))
    assert validate(medium, out.schedule).ok


def test_lns_without_solution_reports_unknown(medium):
    m = build_model(medium)
    out = lns_solve(m, LnsConfig(time_limit=0.0))
    assert out.schedule is None
    assert out.status is Status.UNKNOWN
