import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import chain_port, make_instance
from sutp.domain import LOW, Conveyor, Dumper, Instance, PortTopology, Stacker, Stockpile, ceil_div
from sutp.generator import (
    GRID_SIZES,
    SEEDS_PER_SIZE,
    GeneratorConfig,
    generate_grid,
    generate_instance,
    grid_seed,
    horizon_for,
    tiny_instance,
)
from sutp.io import dumps, instance_to_doc
from sutp.lns import solve
from sutp.model import build_model
from sutp.oracle import OracleTooLarge, brute_force_optimal
from sutp.validator import StructuralError, validate


# --- generator ------------------------------------------------------------------------------

def test_five_big_trains_have_5_to_20_units(reference_port):
    for k in range(SEEDS_PER_SIZE):
        inst = generate_instance(reference_port, GeneratorConfig(5, grid_seed(5, k)))
        assert len(inst.big_trains) == 5
        assert 5 <= len(inst.units) <= 20


def test_grid_has_420_instances():
    assert len(GRID_SIZES) * SEEDS_PER_SIZE == 420
    assert len({grid_seed(n, k) for n in GRID_SIZES for k in range(SEEDS_PER_SIZE)}) == 420


def test_grid_unit_totals_within_7_to_166(reference_port):
    totals = [len(inst.units) for _, _, _, inst in generate_grid(reference_port)]
    assert len(totals) == 420
    assert min(totals) >= 7 and max(totals) <= 166


def test_generator_is_deterministic(reference_port):
    a = generate_instance(reference_port, GeneratorConfig(20, 7))
    b = generate_instance(reference_port, GeneratorConfig(20, 7))
    c = generate_instance(reference_port, GeneratorConfig(20, 8))
    assert dumps(instance_to_doc(a)) == dumps(instance_to_doc(b))
    assert dumps(instance_to_doc(a)) != dumps(instance_to_doc(c))


def test_generated_instance_shape(reference_port):
    inst = generate_instance(reference_port, GeneratorConfig(30, 3))
    arrivals = [b.arrival for b in inst.big_trains]
    assert arrivals == sorted(arrivals)
    assert all(0 <= a < 1440 for a in arrivals)
    assert inst.horizon == horizon_for(len(inst.units))
    for big in inst.big_trains:
        assert len({(u.train_type, u.height_class) for u in big.units}) == 1
        assert all(4500 <= u.load <= 5500 for u in big.units)


def test_heavy_cargo_on_few_piles_stays_within_capacity(reference_port):
    # four C64/C70 trains once brought 20306 t of K40 to the one 20000 t pile they reach
    build_model(generate_instance(reference_port, GeneratorConfig(45, grid_seed(45, 4))))


@settings(max_examples=10, deadline=None)
@given(st.integers(5, 60), st.integers(0, 10**6))
def test_generated_instances_pass_root_propagation(reference_port, size, seed):
    model = build_model(generate_instance(reference_port, GeneratorConfig(size, seed)))
    assert all(any(model.solver.hi[b] for b in t.pile.values()) for t in model.trains)


def test_generator_rejects_empty_config():
    with pytest.raises(ValueError):
        GeneratorConfig(0, 1)


# --- validator ------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def solved_tiny():
    inst = tiny_instance(3)
    out = solve(inst, "single", None, time_limit=30)
    assert out.schedule is not None
    return inst, out.schedule


def test_solver_output_validates(solved_tiny):
    inst, sched = solved_tiny
    report = validate(inst, sched)
    assert report.ok, [str(v) for v in report.violations]


def test_overlap_on_a_dumper_is_c1():
    port = chain_port(rate=5000)
    inst = make_instance(port, [(0, [(5000, "A")]), (0, [(5000, "A")])])
    sched = solve(inst, "single", None, time_limit=10).schedule
    a, b = sched.trains
    clash = dataclasses.replace(b, start=a.start + 10, end=a.start + 10 + (b.end - b.start))
    bad = dataclasses.replace(sched, trains=[a, clash], makespan=max(a.end, clash.end))
    assert "C1" in validate(inst, bad).tags()


def test_clearance_counts_on_the_dumper():
    port = chain_port(rate=5000, clear=60)
    inst = make_instance(port, [(0, [(5000, "A")]), (0, [(5000, "A")])])
    sched = solve(inst, "single", None, time_limit=10).schedule
    a, b = sorted(sched.trains, key=lambda t: t.start)
    assert b.start >= a.end + 60
    # after the dumper clears is fine, during the clearance is not
    early = dataclasses.replace(b, start=a.end + 30, end=a.end + 30 + (b.end - b.start))
    bad = dataclasses.replace(sched, trains=[a, early], makespan=max(a.end, early.end))
    assert validate(inst, bad).tags() == {"C1"}


def test_group_of_first_and_last_unit_is_c2(tiny_port):
    inst = make_instance(tiny_port, [(0, [(4000, "A"), (4000, "A"), (4000, "B"), (4000, "B")])])
    inst = dataclasses.replace(inst, horizon=3000)
    sched = solve(inst, "single", None, time_limit=30).schedule
    by = {a.index: a for a in sched.trains}
    groups = {0: 0, 1: 1, 2: 2, 3: 0}
    trains = [dataclasses.replace(by[i], group=groups[i]) for i in range(4)]
    bad = dataclasses.replace(sched, trains=trains)
    assert "C2" in validate(inst, bad).tags()


def test_early_start_is_c4_and_split_wait_is_c3(solved_tiny):
    inst, sched = solved_tiny
    a = sched.trains[0]
    big = inst.big_train(a.big_train)
    d = a.end - a.start
    too_early = dataclasses.replace(a, start=big.arrival + 10, end=big.arrival + 10 + d)
    bad = dataclasses.replace(sched, trains=[too_early] + sched.trains[1:])
    assert "C4" in validate(inst, bad).tags()
    if sum(sched.splits[big.id]):
        during = big.arrival + 95
        split_wait = dataclasses.replace(a, start=during, end=during + d)
        bad = dataclasses.replace(sched, trains=[split_wait] + sched.trains[1:])
        assert "C3" in validate(inst, bad).tags()


def test_wrong_duration_is_c11(solved_tiny):
    inst, sched = solved_tiny
    a = sched.trains[0]
    bad = dataclasses.replace(sched, trains=[dataclasses.replace(a, end=a.end + 1)]
                              + sched.trains[1:])
    assert "C11" in validate(inst, bad).tags()


def test_wrong_cargo_pile_is_c10(solved_tiny):
    inst, sched = solved_tiny
    a = sched.trains[0]
    cargo = inst.big_train(a.big_train).units[a.index].cargo_type
    other = next(p for p in inst.port.stockpiles if p.cargo_type != cargo)
    bad = dataclasses.replace(sched, trains=[dataclasses.replace(a, stockpile=other.id)]
                              + sched.trains[1:])
    assert "C10" in validate(inst, bad).tags()


def test_misreported_makespan(solved_tiny):
    inst, sched = solved_tiny
    bad = dataclasses.replace(sched, makespan=sched.makespan - 1)
    assert validate(inst, bad).tags() == {"makespan"}


def test_past_horizon(solved_tiny):
    inst, sched = solved_tiny
    short = dataclasses.replace(inst, horizon=sched.makespan - 1)
    assert "horizon" in validate(short, sched).tags()


def test_dangling_reference_is_structural(solved_tiny):
    inst, sched = solved_tiny
    a = sched.trains[0]
    bad = dataclasses.replace(sched, trains=[dataclasses.replace(a, dumper="NOPE")]
                              + sched.trains[1:])
    with pytest.raises(StructuralError):
        validate(inst, bad)
    with pytest.raises(StructuralError):
        validate(inst, dataclasses.replace(sched, trains=sched.trains[1:]))


# --- oracle ------------------------------------------------------------------------------------

def test_oracle_single_train():
    port = chain_port(rate=5000)
    inst = make_instance(port, [(25, [(5200, "A")])])
    best, sched = brute_force_optimal(inst)
    assert best == 25 + 90 + ceil_div(5200 * 60, 5000)
    assert validate(inst, sched).ok


def test_oracle_serializes_shared_conveyor():
    dumpers = tuple(Dumper(f"D{i}", frozenset({"T"}), frozenset({"A"}), frozenset({LOW}), 1, 60,
                           {"T": 6000}) for i in (1, 2))
    port = PortTopology(
        dumpers=dumpers,
        conveyors=(Conveyor("C1"), Conveyor("C2"), Conveyor("C3")),
        stackers=(Stacker("S1", ("P1",)),),
        stockpiles=(Stockpile("P1", "A", 20000),),
        links=(("D1", "C1"), ("D2", "C2"), ("C1", "C3"), ("C2", "C3"), ("C3", "S1")),
    )
    inst = make_instance(port, [(0, [(6000, "A")]), (0, [(6000, "A")])])
    best, sched = brute_force_optimal(inst)
    # two dumpers, but the trains still queue on the shared conveyor (no clearance there)
    assert best == 90 + 60 + 60
    assert validate(inst, sched).ok
    assert solve(inst, "single", None, time_limit=10).makespan == best


def test_oracle_reports_infeasible():
    inst = make_instance(chain_port(capacity=9000), [(0, [(5000, "A")]), (0, [(5000, "A")])])
    assert brute_force_optimal(inst) == (None, None)


def test_oracle_refuses_large_instances(reference_port):
    inst = generate_instance(reference_port, GeneratorConfig(5, 1))
    with pytest.raises(OracleTooLarge):
        brute_force_optimal(inst)


@pytest.mark.parametrize("seed", range(25))
def test_oracle_monotone_in_trains(seed):
    inst = tiny_instance(seed)
    if len(inst.big_trains) < 2:
        return
    fewer = Instance(inst.port, inst.big_trains[:-1], inst.horizon)
    full, _ = brute_force_optimal(inst)
    part, _ = brute_force_optimal(fewer)
    if full is not None:
        assert part is not None and part <= full


@pytest.mark.parametrize("seed", range(25))
def test_oracle_schedules_validate(seed):
    inst = tiny_instance(seed)
    best, sched = brute_force_optimal(inst)
    if best is not None:
        assert validate(inst, sched).ok
        assert sched.makespan == best
