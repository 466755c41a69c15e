"""Static port description and dynamic arrival data.

All times are integer minutes from the start of the horizon and all loads are
integer tons. Every object here is immutable once built, so a port or an
instance can be shared by several solver runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

LOW = "LOW"
HIGH = "HIGH"
HEIGHT_CLASSES = (LOW, HIGH)

DEFAULT_TRANSPORT_MINUTES = 90
DEFAULT_SPLIT_MINUTES = 30
DAY_MINUTES = 1440
DEFAULT_HORIZON_SLACK = 720
MAX_BIG_TRAIN_LENGTH = 4


class PortError(ValueError):
    """The port description breaks one of its structural invariants."""


class InstanceError(ValueError):
    """The arrival data is inconsistent with itself or with the port."""


def height_class(extra_height: float) -> str:
    """Map the additional height above the wagon top to LOW ([0,30]) or HIGH (]30,100])."""
    if extra_height < 0 or extra_height > 100:
        raise ValueError(f"height {extra_height} outside [0, 100]")
    return LOW if extra_height <= 30 else HIGH


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Dumper:
    id: str
    train_types: frozenset[str]
    cargo_types: frozenset[str]
    height_classes: frozenset[str]
    group_length: int
    clear_minutes: int
    # unloading rate in tons/hour per train type; the flow rate defaults to this
    rates: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.group_length not in (1, 2):
            raise PortError(f"dumper {self.id}: group length must be 1 or 2")
        if self.clear_minutes <= 0:
            raise PortError(f"dumper {self.id}: clearance must be positive")
        if not self.height_classes <= set(HEIGHT_CLASSES):
            raise PortError(f"dumper {self.id}: unknown height class")

    def accepts(self, train_type: str | None = None, cargo_type: str | None = None,
                height: str | None = None) -> bool:
        """True when the dumper takes this train; ``None`` means any value."""
        return ((train_type is None or train_type in self.train_types)
                and (cargo_type is None or cargo_type in self.cargo_types)
                and (height is None or height in self.height_classes))


@dataclass(frozen=True)
class Conveyor:
    id: str


@dataclass(frozen=True)
class Stacker:
    id: str
    stockpiles: tuple[str, ...]


@dataclass(frozen=True)
class Stockpile:
    id: str
    cargo_type: str
    capacity: int

    def __post_init__(self):
        if self.capacity < 0:
            raise PortError(f"stockpile {self.id}: negative capacity")


@dataclass(frozen=True)
class EquipmentFlow:
    """A dumper -> conveyors -> stacker route with its per train type rates."""

    path_id: int
    dumper_id: str
    conveyor_ids: tuple[str, ...]
    stacker_id: str
    train_types: frozenset[str]
    rates: Mapping[str, int] = field(compare=False)

    @property
    def route(self) -> tuple[str, ...]:
        return (self.dumper_id, *self.conveyor_ids, self.stacker_id)

    def duration(self, load: int, train_type: str) -> int:
        """Processing minutes for ``load`` tons, rounded up to a whole minute."""
        return ceil_div(load * 60, self.rates[train_type])


@dataclass(frozen=True, eq=False)
class PortTopology:
    """The equipment graph of a port.

    ``links`` holds the dumper->conveyor, conveyor->conveyor and
    conveyor->stacker arcs; stacker->stockpile arcs come from
    ``Stacker.stockpiles``. ``path_rates`` optionally overrides the dumper
    rate for a given route.
    """

    dumpers: tuple[Dumper, ...]
    conveyors: tuple[Conveyor, ...]
    stackers: tuple[Stacker, ...]
    stockpiles: tuple[Stockpile, ...]
    links: tuple[tuple[str, str], ...]
    transport_minutes: int = DEFAULT_TRANSPORT_MINUTES
    split_minutes: int = DEFAULT_SPLIT_MINUTES
    path_rates: Mapping[tuple[str, ...], Mapping[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        for label, items in (("dumper", self.dumpers), ("conveyor", self.conveyors),
                             ("stacker", self.stackers), ("stockpile", self.stockpiles)):
            ids = [x.id for x in items]
            if len(set(ids)) != len(ids):
                raise PortError(f"duplicate {label} id")
        object.__setattr__(self, "_dumper", {d.id: d for d in self.dumpers})
        object.__setattr__(self, "_stacker", {s.id: s for s in self.stackers})
        object.__setattr__(self, "_pile", {p.id: p for p in self.stockpiles})
        object.__setattr__(self, "_conveyor_index", {c.id: i for i, c in enumerate(self.conveyors)})
        succ: dict[str, list[str]] = {}
        for a, b in self.links:
            succ.setdefault(a, []).append(b)
        object.__setattr__(self, "_succ", {k: tuple(v) for k, v in succ.items()})
        object.__setattr__(self, "_flows", None)
        self._check()

    # lookups -----------------------------------------------------------------
    def dumper(self, dumper_id: str) -> Dumper:
        return self._dumper[dumper_id]

    def stacker(self, stacker_id: str) -> Stacker:
        return self._stacker[stacker_id]

    def stockpile(self, pile_id: str) -> Stockpile:
        return self._pile[pile_id]

    def successors(self, node: str) -> tuple[str, ...]:
        return self._succ.get(node, ())

    def has_conveyor(self, conveyor_id: str) -> bool:
        return conveyor_id in self._conveyor_index

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        piles = tuple((s.id, p) for s in self.stackers for p in s.stockpiles)
        return self.links + piles

    @property
    def train_types(self) -> frozenset[str]:
        return frozenset().union(*(d.train_types for d in self.dumpers))

    @property
    def cargo_types(self) -> frozenset[str]:
        accepted = frozenset().union(*(d.cargo_types for d in self.dumpers))
        return accepted | {p.cargo_type for p in self.stockpiles}

    @property
    def length_two_dumpers(self) -> tuple[Dumper, ...]:
        return tuple(d for d in self.dumpers if d.group_length == 2)

    def rates_for(self, route: tuple[str, ...]) -> Mapping[str, int]:
        return self.path_rates.get(route) or self._dumper[route[0]].rates

    # invariants ----------------------------------------------------------------
    def _check(self):
        dumpers, stackers = set(self._dumper), set(self._stacker)
        conveyors = set(self._conveyor_index)
        for a, b in self.links:
            ok = ((a in dumpers and b in conveyors)
                  or (a in conveyors and (b in conveyors or b in stackers)))
            if not ok:
                raise PortError(f"illegal link {a}->{b}")
        for s in self.stackers:
            if not s.stockpiles:
                raise PortError(f"stacker {s.id} reaches no stockpile")
            for p in s.stockpiles:
                if p not in self._pile:
                    raise PortError(f"stacker {s.id} reaches unknown stockpile {p}")
        # conveyor subgraph must be acyclic
        state: dict[str, int] = {}
        for root in conveyors:
            if root in state:
                continue
            stack = [(root, iter(self.successors(root)))]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next((n for n in it if n in conveyors), None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state.get(nxt) == 1:
                    raise PortError(f"conveyor cycle through {nxt}")
                elif nxt not in state:
                    state[nxt] = 1
                    stack.append((nxt, iter(self.successors(nxt))))
        reached = {p for s in self.stackers for p in s.stockpiles}
        missing = [p.id for p in self.stockpiles if p.id not in reached]
        if missing:
            raise PortError(f"stockpiles unreachable by any stacker: {missing[:5]}")
        seen: set[str] = set()
        frontier = [c for d in self.dumpers for c in self.successors(d.id)]
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            if node in conveyors:
                frontier.extend(self.successors(node))
        lost = [s for s in stackers if s not in seen]
        if lost:
            raise PortError(f"stackers unreachable from any dumper: {lost[:5]}")


@dataclass(frozen=True)
class UnitTrain:
    big_train_id: str
    index: int
    load: int
    cargo_type: str
    train_type: str
    height_class: str

    def __post_init__(self):
        if self.load <= 0:
            raise InstanceError(f"unit train {self.id}: load must be positive")
        if self.height_class not in HEIGHT_CLASSES:
            raise InstanceError(f"unit train {self.id}: unknown height {self.height_class}")

    @property
    def id(self) -> str:
        return f"{self.big_train_id}:{self.index}"


@dataclass(frozen=True)
class BigTrain:
    id: str
    arrival: int
    units: tuple[UnitTrain, ...]

    def __post_init__(self):
        if not 1 <= len(self.units) <= MAX_BIG_TRAIN_LENGTH:
            raise InstanceError(f"big train {self.id}: length {len(self.units)} not in 1..4")
        for i, u in enumerate(self.units):
            if u.index != i or u.big_train_id != self.id:
                raise InstanceError(f"big train {self.id}: unit {i} misnumbered")

    @property
    def length(self) -> int:
        return len(self.units)


@dataclass(frozen=True, eq=False)
class Instance:
    port: PortTopology
    big_trains: tuple[BigTrain, ...]
    horizon: int = DAY_MINUTES + DEFAULT_HORIZON_SLACK

    def __post_init__(self):
        ids = [b.id for b in self.big_trains]
        if len(set(ids)) != len(ids):
            raise InstanceError("duplicate big train id")
        cargo, types = self.port.cargo_types, self.port.train_types
        for b in self.big_trains:
            if not 0 <= b.arrival < self.horizon:
                raise InstanceError(f"big train {b.id}: arrival {b.arrival} outside horizon")
            for u in b.units:
                if u.cargo_type not in cargo:
                    raise InstanceError(f"unit train {u.id}: unknown cargo type {u.cargo_type}")
                if u.train_type not in types:
                    raise InstanceError(f"unit train {u.id}: unknown train type {u.train_type}")

    @property
    def units(self) -> tuple[UnitTrain, ...]:
        return tuple(u for b in self.big_trains for u in b.units)

    def big_train(self, big_id: str) -> BigTrain:
        for b in self.big_trains:
            if b.id == big_id:
                return b
        raise KeyError(big_id)
