import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sutp.cp import Inconsistent, Solver, TableRelation, post_table
from sutp.cp.tables import SMALL_TABLE_MAX, post_table_compact, post_table_small
from sutp.domain import LOW, UnitTrain
from sutp.model import build_len_table
from table_oracle import gac, oracle_trace, random_relation, run_trace


def test_functional_table_follows_assignment():
    s = Solver()
    x, y = s.new_bool(), s.new_bool()
    post_table_compact(s, [x, y], TableRelation(2, [(0, 0), (1, 1)]))
    s.assign(x, 1)
    assert s.propagate()
    assert s.value(y) == 1


@pytest.mark.parametrize("algorithm", ["compact", "small"])
def test_one_tuple_table_assigns_every_column(algorithm):
    s = Solver()
    xs = [s.new_value_var(range(5)) for _ in range(4)]
    post_table(s, xs, TableRelation(4, [(3, 1, 4, 0)]), algorithm)
    assert s.propagate()
    assert [s.value(x) for x in xs] == [3, 1, 4, 0]


def test_small_table_size_boundary():
    s = Solver()
    xs = [s.new_value_var(range(8)) for _ in range(2)]
    rows = [(i // 8, i % 8) for i in range(64)]
    post_table_small(s, xs, TableRelation(2, rows))
    assert s.propagate()
    s2 = Solver()
    ys = [s2.new_value_var(range(9)) for _ in range(2)]
    with pytest.raises(ValueError):
        post_table_small(s2, ys, TableRelation(2, [(i // 9, i % 9) for i in range(65)]))
    assert SMALL_TABLE_MAX == 64


def test_auto_picks_compact_above_64_tuples():
    s = Solver()
    xs = [s.new_value_var(range(9)) for _ in range(2)]
    prop = post_table(s, xs, TableRelation(2, [(i // 9, i % 9) for i in range(70)]))
    assert type(prop).__name__ == "CompactTable"


def test_relation_rejects_wrong_arity_and_dedups():
    with pytest.raises(ValueError):
        TableRelation(2, [(1, 2, 3)])
    assert len(TableRelation(2, [(1, 2), (1, 2), (0, 0)])) == 2


def test_no_valid_row_fails_on_post():
    s = Solver()
    xs = [s.new_value_var([0, 1]) for _ in range(2)]
    with pytest.raises(Inconsistent):
        post_table_compact(s, xs, TableRelation(2, [(2, 2)]))


def test_efficiency_table_fixes_duration_from_path(reference_port):
    from sutp.generator import routable
    from sutp.topology import enumerate_feasible_paths
    flows = enumerate_feasible_paths(reference_port, "C70", "K01", LOW)
    assert len(flows) == 10
    unit = UnitTrain("B1", 0, 5200, "K01", "C70", LOW)
    assert routable(reference_port, unit.train_type, unit.cargo_type, unit.height_class, unit.load)
    rel = TableRelation(2, [(f.path_id, f.duration(unit.load, unit.train_type)) for f in flows])
    s = Solver()
    path = s.new_value_var([f.path_id for f in flows])
    dur = s.new_value_var({d for _, d in rel.tuples})
    post_table(s, [path, dur], rel)
    s.assign(path, flows[3].path_id)
    assert s.propagate()
    assert s.is_fixed(dur)
    assert s.value(dur) == flows[3].duration(unit.load, unit.train_type)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9), st.integers(3, 6), st.integers(1, 500), st.integers(2, 6))
def test_compact_table_is_gac(seed, arity, n_tuples, dom):
    rel = random_relation(random.Random(seed), arity, n_tuples, dom)
    assert run_trace(rel, dom, "compact", seed) == oracle_trace(rel, dom, seed)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9), st.integers(2, 6), st.integers(1, 64), st.integers(2, 6))
def test_small_table_matches_compact(seed, arity, n_tuples, dom):
    rel = random_relation(random.Random(seed), arity, n_tuples, dom)
    small = run_trace(rel, dom, "small", seed)
    assert small == run_trace(rel, dom, "compact", seed)
    assert small == oracle_trace(rel, dom, seed)


def test_len_table_traces_agree_between_algorithms():
    rel = build_len_table(4, ["CD10", "CD11", "CD12", "CD13"])
    assert len(rel) == 29
    for seed in range(1000):
        assert run_trace(rel, 2, "small", seed) == run_trace(rel, 2, "compact", seed)


def test_gac_oracle_on_hand_example():
    doms = [frozenset({0, 1}), frozenset({0, 1, 2})]
    assert gac(doms, [(0, 2), (1, 1), (3, 0)]) == [frozenset({0, 1}), frozenset({1, 2})]
    assert gac(doms, [(5, 5)]) is None
