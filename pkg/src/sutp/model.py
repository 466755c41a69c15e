"""Translate an instance into a constraint model over the solver kernel.

Every unit train gets an interval (start, duration, end), a path id, one bool
per piece of equipment it could use, one bool per admissible stockpile, an
``alone`` bool (processed on a length-1 dumper) and a clearance value. Big
trains get one split bool per gap between consecutive unit trains.
Compatibility rules are applied to the initial domains, so a train only gets
bools for the equipment of its own feasible flows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from sutp.cp.arith import GuardedChain, IntervalSum, LinearCapacity, MaxOf, Release
from sutp.cp.kernel import Inconsistent, Solver
from sutp.cp.tables import TableRelation, post_table
from sutp.cp.unary import (
    OptionalActivity,
    post_min_link,
    post_unary_multi_interval,
    post_unary_single_interval,
)
from sutp.domain import BigTrain, Dumper, EquipmentFlow, Instance, UnitTrain
from sutp.schedule import Schedule, TrainAssignment, groups_from_splits
from sutp.topology import enumerate_feasible_paths

UNARY_VARIANTS = ("single", "multi")


class ModelInfeasible(Exception):
    """The instance has no solution for a reason visible before search."""

    def __init__(self, message: str, train_id: str | None = None):
        super().__init__(message)
        self.train_id = train_id


@dataclass
class TrainVars:
    unit: UnitTrain
    index: int
    big_index: int
    flows: list[EquipmentFlow]
    piles: list[str]
    start: int
    end: int
    duration: int
    path: int
    alone: int
    clear: int
    dmp: dict[str, int] = field(default_factory=dict)
    stk: dict[str, int] = field(default_factory=dict)
    cnv: dict[str, int] = field(default_factory=dict)
    pile: dict[str, int] = field(default_factory=dict)

    @property
    def id(self) -> str:
        return self.unit.id


@dataclass
class Resource:
    kind: str  # dumper, stacker, conveyor or stockpile
    id: str
    trains: list[int]
    activities: list[OptionalActivity]


@dataclass
class SutpModel:
    instance: Instance
    solver: Solver
    trains: list[TrainVars]
    splits: dict[str, list[int]]
    makespan: int
    resources: list[Resource]
    unary: str
    tables: dict[str, dict] = field(default_factory=dict)

    def flow(self, path_id: int) -> EquipmentFlow:
        return self._flows[path_id]

    def __post_init__(self):
        self._flows = {f.path_id: f for t in self.trains for f in t.flows}

    def release_base(self, t: TrainVars) -> int:
        arrival = self.instance.big_trains[t.big_index].arrival
        return arrival + self.instance.port.transport_minutes


# ----------------------------------------------------------------------------- tables

def build_len_table(big_train: BigTrain | int, length_two_dumpers) -> TableRelation:
    """Legal ways to cut a big train into groups of one or two unit trains.

    Columns are the split bools, then for every unit train one bool per
    length-2 dumper followed by its ``alone`` bool. A pair shares one
    length-2 dumper; a single unit train is alone.
    """
    length = big_train if isinstance(big_train, int) else big_train.length
    if length < 2:
        raise ValueError("a big train of length 1 has no length table")
    t2 = [d.id if isinstance(d, Dumper) else d for d in length_two_dumpers]
    width = len(t2) + 1
    columns = [("split", i) for i in range(length - 1)]
    for i in range(length):
        columns += [("dmp", i, d) for d in t2] + [("alone", i)]

    rows = []
    for sizes in _segmentations(length):
        pairs = sum(1 for z in sizes if z == 2)
        for choice in product(range(len(t2)), repeat=pairs):
            splits = [1] * (length - 1)
            units = [[0] * width for _ in range(length)]
            pos, k = 0, 0
            for z in sizes:
                if z == 1:
                    units[pos][-1] = 1
                else:
                    splits[pos] = 0
                    units[pos][choice[k]] = 1
                    units[pos + 1][choice[k]] = 1
                    k += 1
                pos += z
            rows.append(tuple(splits) + tuple(b for u in units for b in u))
    return TableRelation(len(columns), rows, columns)


def _segmentations(n: int) -> list[tuple[int, ...]]:
    if n == 0:
        return [()]
    out = [(1,) + rest for rest in _segmentations(n - 1)]
    if n >= 2:
        out += [(2,) + rest for rest in _segmentations(n - 2)]
    return out


def admissible_piles(instance: Instance, unit: UnitTrain, flows) -> list[str]:
    """Stockpiles of the right cargo, large enough, reached by one of the flows."""
    port = instance.port
    stackers = {f.stacker_id for f in flows}
    reachable = {p for s in stackers for p in port.stacker(s).stockpiles}
    return [p.id for p in port.stockpiles
            if p.id in reachable and p.cargo_type == unit.cargo_type and p.capacity >= unit.load]


def build_sp_link(instance: Instance, unit: UnitTrain, flows=None) -> TableRelation:
    """One row per (stacker, stockpile) couple the train could use, one-hot on both."""
    port = instance.port
    if flows is None:
        flows = enumerate_feasible_paths(port, unit.train_type, unit.cargo_type, unit.height_class)
    stackers = _ordered(port, "stacker", {f.stacker_id for f in flows})
    piles = admissible_piles(instance, unit, flows)
    rows = []
    for i, s in enumerate(stackers):
        reach = set(port.stacker(s).stockpiles)
        for j, p in enumerate(piles):
            if p in reach:
                row = [0] * (len(stackers) + len(piles))
                row[i] = 1
                row[len(stackers) + j] = 1
                rows.append(tuple(row))
    columns = [("stk", s) for s in stackers] + [("pile", p) for p in piles]
    return TableRelation(max(1, len(columns)), rows, columns if columns else [])


def _ordered(port, kind: str, ids) -> list[str]:
    pool = {"dumper": port.dumpers, "stacker": port.stackers,
            "conveyor": port.conveyors, "stockpile": port.stockpiles}[kind]
    return [x.id for x in pool if x.id in ids]


def unit_flows(instance: Instance, unit: UnitTrain) -> list[EquipmentFlow]:
    """Feasible flows of a unit train whose stacker reaches an admissible stockpile."""
    port = instance.port
    flows = enumerate_feasible_paths(port, unit.train_type, unit.cargo_type, unit.height_class)
    piles = set(admissible_piles(instance, unit, flows))
    return [f for f in flows if piles & set(port.stacker(f.stacker_id).stockpiles)]


# ----------------------------------------------------------------------------- model

def build_model(instance: Instance, unary: str = "single", table_algorithm: str = "auto",
                solver: Solver | None = None) -> SutpModel:
    """Post the full model and run root propagation.

    Raises :class:`ModelInfeasible` when a unit train has no usable flow or
    stockpile, or when root propagation already fails.
    """
    if unary not in UNARY_VARIANTS:
        raise ValueError(f"unary variant must be one of {UNARY_VARIANTS}")
    port = instance.port
    s = solver or Solver()
    horizon = instance.horizon
    zero = s.new_const(0, "zero")
    t2 = port.length_two_dumpers
    tables: dict[str, dict] = {"eff": {}, "equip": {}, "sp_link": {}, "len": {}, "clear": {}}

    def table(xs, rel):
        try:
            post_table(s, xs, rel, table_algorithm)
        except Inconsistent:
            raise ModelInfeasible("a table has no tuple left") from None

    trains: list[TrainVars] = []
    splits: dict[str, list[int]] = {}
    try:
        for bi, big in enumerate(instance.big_trains):
            splits[big.id] = [s.new_bool(f"split[{big.id},{i}]") for i in range(big.length - 1)]
            for unit in big.units:
                trains.append(_train_vars(s, instance, unit, len(trains), bi, horizon))
    except Inconsistent:
        raise ModelInfeasible("empty time window") from None

    for t in trains:
        tid = t.id
        durations = [(f.path_id, f.duration(t.unit.load, t.unit.train_type)) for f in t.flows]
        eff = TableRelation(2, durations, ["path", "duration"])
        tables["eff"][tid] = eff
        table([t.path, t.duration], eff)

        dmps, stks, cnvs = list(t.dmp), list(t.stk), list(t.cnv)
        rows = []
        for f in t.flows:
            row = [f.path_id]
            row += [int(d == f.dumper_id) for d in dmps]
            row += [int(x == f.stacker_id) for x in stks]
            row += [int(c in f.conveyor_ids) for c in cnvs]
            row.append(int(port.dumper(f.dumper_id).group_length == 1))
            rows.append(tuple(row))
        cols = (["path"] + [("dmp", d) for d in dmps] + [("stk", x) for x in stks]
                + [("cnv", c) for c in cnvs] + ["alone"])
        equip = TableRelation(len(cols), rows, cols)
        tables["equip"][tid] = equip
        table([t.path] + [t.dmp[d] for d in dmps] + [t.stk[x] for x in stks]
              + [t.cnv[c] for c in cnvs] + [t.alone], equip)

        sp = build_sp_link(instance, t.unit, t.flows)
        tables["sp_link"][tid] = sp
        table([t.stk[c[1]] for c in sp.columns if c[0] == "stk"]
              + [t.pile[c[1]] for c in sp.columns if c[0] == "pile"], sp)

        s.post(IntervalSum(t.start, t.duration, t.end))

    by_big: dict[int, list[TrainVars]] = {}
    for t in trains:
        by_big.setdefault(t.big_index, []).append(t)

    for bi, big in enumerate(instance.big_trains):
        units = by_big[bi]
        cut = splits[big.id]
        base = big.arrival + port.transport_minutes
        for t in units:
            s.post(Release(t.start, base, port.split_minutes, cut))
        for i in range(big.length - 1):
            s.post(GuardedChain(cut[i], units[i].end, units[i + 1].start))
        if big.length == 1:
            try:
                s.assign(units[0].alone, 1)
            except Inconsistent:
                raise ModelInfeasible("single unit train needs a length-1 dumper",
                                      units[0].id) from None
        else:
            rel = build_len_table(big, t2)
            tables["len"][big.id] = rel
            xs = list(cut)
            for t in units:
                xs += [t.dmp.get(d.id, zero) for d in t2] + [t.alone]
            table(xs, rel)
        for i, t in enumerate(units):
            gap = cut[i] if i < big.length - 1 else None
            dmps = list(t.dmp)
            rows = []
            for k, d in enumerate(dmps):
                dumper = port.dumper(d)
                onehot = tuple(int(k == m) for m in range(len(dmps)))
                for g in ((0, 1) if gap is not None else (None,)):
                    if dumper.group_length == 1 or g is None or g == 1:
                        clr = dumper.clear_minutes
                    else:
                        clr = 0
                    rows.append(onehot + (() if g is None else (g,)) + (clr,))
            cols = [("dmp", d) for d in dmps] + (["split"] if gap is not None else []) + ["clear"]
            rel = TableRelation(len(cols), rows, cols)
            tables["clear"][t.id] = rel
            table([t.dmp[d] for d in dmps] + ([gap] if gap is not None else []) + [t.clear], rel)

    # stockpile capacities
    for p in port.stockpiles:
        users = [(t.pile[p.id], t.unit.load) for t in trains if p.id in t.pile]
        if sum(w for _, w in users) > p.capacity:
            s.post(LinearCapacity([b for b, _ in users], [w for _, w in users], p.capacity))

    resources = _post_resources(s, instance, trains, unary)

    makespan = s.new_time_var(0, horizon, "makespan")
    s.post(MaxOf(makespan, [t.end for t in trains]))
    model = SutpModel(instance, s, trains, splits, makespan, resources, unary, tables)
    if not s.propagate():
        raise ModelInfeasible("root propagation fails")
    return model


def _train_vars(s: Solver, instance: Instance, unit: UnitTrain, index: int, big_index: int,
                horizon: int) -> TrainVars:
    port = instance.port
    flows = unit_flows(instance, unit)
    if not flows:
        raise ModelInfeasible(f"unit train {unit.id} has no feasible flow and stockpile", unit.id)
    piles = admissible_piles(instance, unit, flows)
    arrival = instance.big_trains[big_index].arrival
    tag = unit.id
    durations = sorted({f.duration(unit.load, unit.train_type) for f in flows})
    start = s.new_time_var(arrival + port.transport_minutes, horizon - durations[0], f"start[{tag}]")
    t = TrainVars(
        unit=unit, index=index, big_index=big_index, flows=flows, piles=piles,
        start=start,
        end=s.new_time_var(s.lo[start] + durations[0], horizon, f"end[{tag}]"),
        duration=s.new_value_var(durations, f"duration[{tag}]"),
        path=s.new_value_var([f.path_id for f in flows], f"path[{tag}]"),
        alone=s.new_bool(f"alone[{tag}]"),
        clear=s.new_value_var(sorted({0} | {port.dumper(f.dumper_id).clear_minutes for f in flows}),
                              f"clear[{tag}]"),
    )
    used_d = {f.dumper_id for f in flows}
    used_s = {f.stacker_id for f in flows}
    used_c = {c for f in flows for c in f.conveyor_ids}
    for d in _ordered(port, "dumper", used_d):
        t.dmp[d] = s.new_bool(f"dmp[{tag},{d}]")
    for x in _ordered(port, "stacker", used_s):
        t.stk[x] = s.new_bool(f"stk[{tag},{x}]")
    for c in _ordered(port, "conveyor", used_c):
        t.cnv[c] = s.new_bool(f"cnv[{tag},{c}]")
    for p in piles:
        t.pile[p] = s.new_bool(f"pile[{tag},{p}]")
    return t


def _post_resources(s: Solver, instance: Instance, trains: list[TrainVars],
                    unary: str) -> list[Resource]:
    port = instance.port
    resources = []
    classes = (("dumper", port.dumpers, "dmp"), ("stacker", port.stackers, "stk"),
               ("conveyor", port.conveyors, "cnv"), ("stockpile", port.stockpiles, "pile"))
    # per train and exactly-one class: (usage, local start, local end) triples
    links: dict[tuple[int, str], list[tuple[int, int, int]]] = {}
    for kind, pool, attr in classes:
        for eq in pool:
            users = [t for t in trains if eq.id in getattr(t, attr)]
            if not users:
                continue
            acts = []
            for t in users:
                usage = getattr(t, attr)[eq.id]
                act = OptionalActivity(t.start, t.end, usage, duration=t.duration, label=t.id)
                if kind == "dumper":
                    if eq.group_length == 1:
                        act.clearance = eq.clear_minutes
                    else:
                        act.clearance_var = t.clear
                acts.append(act)
            resources.append(Resource(kind, eq.id, [t.index for t in users], acts))
            if unary == "single":
                post_unary_single_interval(s, eq.id, acts)
            else:
                _, ls, le = post_unary_multi_interval(s, eq.id, acts)
                if kind != "conveyor":
                    for t, a, x, y in zip(users, acts, ls, le):
                        links.setdefault((t.index, kind), []).append((a.usage, x, y))
    for (ti, _), items in links.items():
        t = trains[ti]
        post_min_link(s, t.start, t.end, [u for u, _, _ in items],
                      [x for _, x, _ in items], [y for _, _, y in items])
    return resources


# ----------------------------------------------------------------------------- solutions

def extract_schedule(model: SutpModel, values: list[int] | None = None,
                     status: str = "feasible", stats: dict | None = None) -> Schedule:
    """Read a schedule from an assignment of every model variable."""
    s = model.solver
    if values is None:
        values = s.snapshot()
        unfixed = [s.names[v] for v in range(s.num_vars) if s.lo[v] != s.hi[v]]
        if unfixed:
            raise RuntimeError(f"unassigned variables: {unfixed[:5]}")
    instance = model.instance
    port = instance.port
    splits = {b: [values[v] for v in vs] for b, vs in model.splits.items()}
    group_of: dict[str, int] = {}
    for big in instance.big_trains:
        for g, members in enumerate(groups_from_splits(big.length, splits[big.id])):
            for i in members:
                group_of[big.units[i].id] = g
    out = []
    for t in model.trains:
        flow = model.flow(values[t.path])
        pile = [p for p, b in t.pile.items() if values[b] == 1]
        if len(pile) != 1:
            raise RuntimeError(f"train {t.id} has {len(pile)} stockpiles")
        dumper = port.dumper(flow.dumper_id)
        clearance = dumper.clear_minutes if dumper.group_length == 1 else values[t.clear]
        out.append(TrainAssignment(
            train_id=t.id, big_train=t.unit.big_train_id, index=t.unit.index,
            start=values[t.start], end=values[t.end], path_id=flow.path_id,
            dumper=flow.dumper_id, conveyors=flow.conveyor_ids, stacker=flow.stacker_id,
            stockpile=pile[0], clearance=clearance, group=group_of[t.id],
        ))
    makespan = max(a.end for a in out)
    return Schedule(out, splits, makespan, status, dict(stats or {}))


def check_with_model(instance: Instance, schedule: Schedule, unary: str = "single") -> bool:
    """Re-post the model, fix it to the schedule and propagate; True iff consistent."""
    try:
        model = build_model(instance, unary)
    except ModelInfeasible:
        return False
    s = model.solver
    given = schedule.by_id()
    try:
        for big_id, vs in model.splits.items():
            flags = schedule.splits.get(big_id)
            if flags is None or len(flags) != len(vs):
                return False
            for v, f in zip(vs, flags):
                s.assign(v, f)
        for t in model.trains:
            a = given.get(t.id)
            if a is None or a.stockpile not in t.pile or not s.contains(t.path, a.path_id):
                return False
            s.assign(t.path, a.path_id)
            s.assign(t.pile[a.stockpile], 1)
            s.assign(t.start, a.start)
            s.assign(t.end, a.end)
    except Inconsistent:
        s.clear_queue()
        return False
    return s.propagate()
