"""Random instances: the benchmark grid on a full port, and tiny ones for exact checks."""

from __future__ import annotations

import random
from dataclasses import dataclass

from sutp.domain import (
    DAY_MINUTES,
    DEFAULT_HORIZON_SLACK,
    HIGH,
    LOW,
    BigTrain,
    Conveyor,
    Dumper,
    Instance,
    PortTopology,
    Stacker,
    Stockpile,
    UnitTrain,
)
from sutp.topology import enumerate_feasible_paths

GRID_SIZES = (5, 10, 15, 17, 20, 22, 25, 30, 35, 40, 45, 50, 55, 60)
SEEDS_PER_SIZE = 30
LENGTH_WEIGHTS = (0.15, 0.30, 0.35, 0.20)  # big trains of 1, 2, 3, 4 unit trains
TRAIN_TYPE_WEIGHTS = {"C80": 0.8, "C70": 0.1, "C64": 0.1}
MIN_UNITS, MAX_UNITS = 7, 166
MINUTES_PER_UNIT = 16


@dataclass(frozen=True)
class GeneratorConfig:
    big_trains: int
    seed: int
    load_range: tuple[int, int] = (4500, 5500)
    length_weights: tuple[float, ...] = LENGTH_WEIGHTS
    train_type_weights: tuple[tuple[str, float], ...] = tuple(TRAIN_TYPE_WEIGHTS.items())
    unit_range: tuple[int, int] = (MIN_UNITS, MAX_UNITS)

    def __post_init__(self):
        if self.big_trains < 1:
            raise ValueError("need at least one big train")


def grid_seed(size: int, k: int) -> int:
    return size * 1000 + k


def horizon_for(units: int) -> int:
    return DAY_MINUTES + max(DEFAULT_HORIZON_SLACK, MINUTES_PER_UNIT * units)


def routable(port: PortTopology, train_type: str, cargo: str, height: str, load: int,
             residual: dict[str, int] | None = None) -> str | None:
    """A stockpile some flow can fill with this unit train, or None.

    With ``residual`` the pile must still have room for the load after the
    trains already committed to it.
    """
    for f in enumerate_feasible_paths(port, train_type, cargo, height):
        for p in port.stacker(f.stacker_id).stockpiles:
            pile = port.stockpile(p)
            room = pile.capacity if residual is None else residual[p]
            if pile.cargo_type == cargo and room >= load:
                return p
    return None


def generate_instance(port: PortTopology, config: GeneratorConfig) -> Instance:
    """Arrivals spread over one day with jitter; compositions drawn per big train."""
    rng = random.Random(config.seed)
    n = config.big_trains
    lo_units, hi_units = config.unit_range
    lo_units = min(lo_units, 4 * n)
    hi_units = max(hi_units, n)
    lengths = range(1, len(config.length_weights) + 1)
    while True:
        sizes = rng.choices(lengths, weights=config.length_weights, k=n)
        if lo_units <= sum(sizes) <= hi_units:
            break
    types = [t for t, _ in config.train_type_weights]
    type_weights = [w for _, w in config.train_type_weights]
    types = [t for t in types if t in port.train_types] or sorted(port.train_types)
    type_weights = type_weights[:len(types)] if len(type_weights) >= len(types) else None
    cargos = sorted(port.cargo_types)

    # every unit is committed to a pile with room left, so the whole instance
    # always fits the stockpile capacities
    residual = {p.id: p.capacity for p in port.stockpiles}
    big_trains = []
    for k, size in enumerate(sizes):
        arrival = int((k + rng.random()) * DAY_MINUTES / n)
        bid = f"B{k + 1:03d}"
        for _ in range(100):
            ttype = rng.choices(types, weights=type_weights)[0]
            height = rng.choice((LOW, HIGH))
            units, taken = [], []
            for i in range(size):
                for _ in range(100):
                    cargo = rng.choice(cargos)
                    load = rng.randint(*config.load_range)
                    pile = routable(port, ttype, cargo, height, load, residual)
                    if pile is not None:
                        break
                else:
                    break
                units.append(UnitTrain(bid, i, load, cargo, ttype, height))
                residual[pile] -= load
                taken.append(pile)
            if len(units) == size:
                break
            for u, pile in zip(units, taken):  # give back what the rejected draw reserved
                residual[pile] += u.load
        else:
            raise ValueError(f"port cannot route any train for big train {bid}")
        big_trains.append(BigTrain(bid, arrival, tuple(units)))
    total = sum(sizes)
    return Instance(port, tuple(big_trains), horizon_for(total))


def generate_grid(port: PortTopology, sizes=GRID_SIZES, seeds_per_size: int = SEEDS_PER_SIZE):
    """Yield (size, k, seed, instance) over the benchmark grid."""
    for size in sizes:
        for k in range(seeds_per_size):
            seed = grid_seed(size, k)
            yield size, k, seed, generate_instance(port, GeneratorConfig(size, seed))


# ---------------------------------------------------------------------------- tiny port

def build_tiny_port(capacity: int = 12000) -> PortTopology:
    """Three dumpers, four conveyors, two stackers, four stockpiles.

    D1 and D2 take single unit trains, D3 takes pairs. D2 and D3 share
    conveyor C4 into stacker S2, so their trains contend there.
    """
    dumpers = (
        Dumper("D1", frozenset({"T"}), frozenset({"A", "B"}), frozenset({LOW, HIGH}), 1, 60,
               {"T": 3334}),
        Dumper("D2", frozenset({"T"}), frozenset({"A", "B"}), frozenset({LOW, HIGH}), 1, 60,
               {"T": 3334}),
        Dumper("D3", frozenset({"T"}), frozenset({"A", "B"}), frozenset({LOW, HIGH}), 2, 45,
               {"T": 5000}),
    )
    return PortTopology(
        dumpers=dumpers,
        conveyors=tuple(Conveyor(c) for c in ("C1", "C2", "C3", "C4")),
        stackers=(Stacker("S1", ("P1", "P2")), Stacker("S2", ("P2", "P3", "P4"))),
        stockpiles=(Stockpile("P1", "A", capacity), Stockpile("P2", "A", capacity),
                    Stockpile("P3", "B", capacity), Stockpile("P4", "B", capacity)),
        links=(("D1", "C1"), ("C1", "S1"), ("D2", "C2"), ("C2", "C4"),
               ("D3", "C3"), ("C3", "C4"), ("C4", "S2")),
    )


def tiny_instance(seed: int, port: PortTopology | None = None, max_big_trains: int = 3,
                  max_length: int = 2) -> Instance:
    """1-3 big trains of 1-2 unit trains arriving within three hours."""
    port = port or build_tiny_port()
    rng = random.Random(seed)
    n = rng.randint(1, max_big_trains)
    arrivals = sorted(rng.randrange(0, 180) for _ in range(n))
    big_trains = []
    for k, arrival in enumerate(arrivals):
        bid = f"B{k + 1}"
        size = rng.randint(1, max_length)
        units = tuple(UnitTrain(bid, i, rng.randint(4000, 6000), rng.choice("AB"), "T",
                                rng.choice((LOW, HIGH)))
                      for i in range(size))
        big_trains.append(BigTrain(bid, arrival, units))
    return Instance(port, tuple(big_trains))
