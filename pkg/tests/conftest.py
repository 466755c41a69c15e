import os

import pytest

from sutp.domain import LOW, BigTrain, Conveyor, Dumper, Instance, PortTopology, Stacker, Stockpile, UnitTrain
from sutp.generator import build_tiny_port
from sutp.reference_port import build_reference_port

NIGHTLY = os.environ.get("SUTP_NIGHTLY") == "1"


@pytest.fixture(scope="session")
def reference_port():
    return build_reference_port()


@pytest.fixture(scope="session")
def tiny_port():
    return build_tiny_port()


def chain_port(rate=5000, capacity=20000, clear=60, length=1):
    """One dumper, one conveyor, one stacker, one stockpile."""
    return PortTopology(
        dumpers=(Dumper("D1", frozenset({"T"}), frozenset({"A"}), frozenset({LOW}), length,
                        clear, {"T": rate}),),
        conveyors=(Conveyor("C1"),),
        stackers=(Stacker("S1", ("P1",)),),
        stockpiles=(Stockpile("P1", "A", capacity),),
        links=(("D1", "C1"), ("C1", "S1")),
    )


def make_instance(port, trains, horizon=2160):
    """``trains`` is a list of (arrival, [(load, cargo), ...]) with train type T, height LOW."""
    bigs = []
    for k, (arrival, units) in enumerate(trains):
        bid = f"B{k + 1}"
        bigs.append(BigTrain(bid, arrival, tuple(UnitTrain(bid, i, load, cargo, "T", LOW)
                                                  for i, (load, cargo) in enumerate(units))))
    return Instance(port, tuple(bigs), horizon)


class LexBrancher:
    """Assign the first unfixed variable to its minimum, or remove that value."""

    def __init__(self, s, xs):
        self.s, self.xs = s, list(xs)

    def next_decision(self):
        from sutp.cp.search import Decision
        s = self.s
        for v in self.xs:
            if s.lo[v] != s.hi[v]:
                a = s.lo[v]
                if s.bits[v] is None:
                    return Decision(lambda v=v, a=a: s.set_max(v, a),
                                    lambda v=v, a=a: s.set_min(v, a + 1))
                return Decision(lambda v=v, a=a: s.assign(v, a), lambda v=v, a=a: s.remove(v, a))
        return None


def domains(s, xs=None):
    xs = range(s.num_vars) if xs is None else xs
    return [tuple(s.values(v)) for v in xs]
