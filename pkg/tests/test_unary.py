import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sutp.cp import Inconsistent, IntervalSum, OptionalActivity, Solver
from sutp.cp.unary import post_unary_multi_interval, post_unary_single_interval
from sutp.generator import tiny_instance
from sutp.model import build_model

VARIANTS = ["single", "multi"]


def activity(s, start_lo, start_hi, duration, mandatory=True, clearance=0, horizon=10_000):
    start = s.new_time_var(start_lo, start_hi)
    dur = s.new_const(duration)
    end = s.new_time_var(start_lo + duration, min(start_hi + duration, horizon))
    s.post(IntervalSum(start, dur, end))
    usage = s.new_bool()
    if mandatory:
        s.assign(usage, 1)
    return OptionalActivity(start, end, usage, clearance=clearance, duration=dur)


def post(s, variant, acts):
    if variant == "single":
        post_unary_single_interval(s, "R", acts)
    else:
        post_unary_multi_interval(s, "R", acts)


@pytest.mark.parametrize("variant", VARIANTS)
def test_overload_fails(variant):
    s = Solver()
    acts = [activity(s, 0, 90, 60, clearance=60, horizon=150) for _ in range(2)]
    post(s, variant, acts)
    assert not s.propagate()


@pytest.mark.parametrize("variant", VARIANTS)
def test_optional_activity_inside_mandatory_one_is_dropped(variant):
    s = Solver()
    busy = activity(s, 0, 0, 100)
    opt = activity(s, 30, 60, 30, mandatory=False, horizon=90)
    post(s, variant, [busy, opt])
    assert s.propagate()
    assert s.value(opt.usage) == 0
    # both placements really overlap
    assert all(st < 100 for st in range(30, 61))


@pytest.mark.parametrize("variant", VARIANTS)
def test_disjoint_windows_prune_nothing(variant):
    s = Solver()
    a = activity(s, 0, 50, 60, clearance=30)
    b = activity(s, 500, 600, 60, clearance=30)
    c = activity(s, 1000, 1100, 60, mandatory=False)
    post(s, variant, [a, b, c])
    before = [(s.lo[v], s.hi[v]) for x in (a, b, c) for v in (x.start, x.end, x.usage)]
    assert s.propagate()
    after = [(s.lo[v], s.hi[v]) for x in (a, b, c) for v in (x.start, x.end, x.usage)]
    assert before == after


@pytest.mark.parametrize("variant", VARIANTS)
def test_precedence_pushes_second_activity(variant):
    s = Solver()
    a = activity(s, 0, 10, 50, clearance=20)
    b = activity(s, 30, 200, 40)
    post(s, variant, [a, b])
    assert s.propagate()
    # b cannot fit before a (a must start by 10), so it starts after a's clearance
    assert s.lo[b.start] == 70


@st.composite
def activity_sets(draw):
    n = draw(st.integers(2, 4))
    specs = []
    for _ in range(n):
        lo = draw(st.integers(0, 12))
        specs.append((lo, lo + draw(st.integers(0, 6)), draw(st.integers(1, 5)),
                      draw(st.sampled_from([None, 0, 1])), draw(st.integers(0, 2))))
    return specs


def brute_force(specs):
    sols = []
    choices = [[(st, u) for st in range(lo, hi + 1)
                for u in ((0, 1) if usage is None else (usage,))]
               for lo, hi, _, usage, _ in specs]
    for combo in product(*choices):
        used = [(st, st + d + c) for (st, u), (_, _, d, _, c) in zip(combo, specs) if u]
        used.sort()
        if all(a[1] <= b[0] for a, b in zip(used, used[1:])):
            sols.append(combo)
    return sols


@settings(max_examples=200, deadline=None)
@given(activity_sets(), st.sampled_from(VARIANTS))
def test_unary_never_removes_a_solution(specs, variant):
    s = Solver()
    acts = []
    for lo, hi, d, usage, c in specs:
        a = activity(s, lo, hi, d, mandatory=False, clearance=c)
        if usage is not None:
            s.assign(a.usage, usage)
        acts.append(a)
    post(s, variant, acts)
    ok = s.propagate()
    sols = brute_force(specs)
    if not ok:
        assert not sols
        return
    for combo in sols:
        for (st_, u), a in zip(combo, acts):
            assert s.contains(a.usage, u)
            if u:
                assert s.lo[a.start] <= st_ <= s.hi[a.start]


def _train_domains(model):
    s = model.solver
    out = []
    for t in model.trains:
        for v in (t.start, t.end, t.path, t.duration, t.clear, t.alone,
                  *t.pile.values(), *t.dmp.values()):
            out.append(frozenset(s.values(v)))
    return out


def _random_moves(model, rng):
    s = model.solver
    moves = []
    for t in model.trains:
        if rng.random() < 0.6:
            moves.append(("path", t.index, rng.choice(list(s.values(t.path)))))
        if rng.random() < 0.4:
            moves.append(("start", t.index, s.lo[t.start] + rng.randint(0, 120)))
    return moves


def _apply_moves(model, moves):
    s = model.solver
    try:
        for kind, i, a in moves:
            t = model.trains[i]
            if kind == "path":
                s.assign(t.path, a)
            else:
                s.set_min(t.start, a)
        return s.propagate()
    except Inconsistent:
        s.clear_queue()
        return False


@pytest.mark.parametrize("seed", range(40))
def test_single_interval_prunes_no_more_than_multi(seed):
    inst = tiny_instance(seed)
    single, multi = build_model(inst, "single"), build_model(inst, "multi")
    assert single.solver.propagate() and multi.solver.propagate()
    for a, b in zip(_train_domains(single), _train_domains(multi)):
        assert a >= b
    rng = random.Random(seed)
    for _ in range(5):
        moves = _random_moves(single, rng)
        single.solver.push()
        multi.solver.push()
        ok_single = _apply_moves(single, moves)
        ok_multi = _apply_moves(multi, moves)
        if ok_multi:
            assert ok_single
        if ok_single and ok_multi:
            for a, b in zip(_train_domains(single), _train_domains(multi)):
                assert a >= b
        single.solver.pop()
        multi.solver.pop()
