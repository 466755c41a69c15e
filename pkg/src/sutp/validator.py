"""Independent feasibility check of a schedule against the port rules.

Nothing here uses the constraint model: durations, clearances, release times
and groups are recomputed from the instance and the split flags. Violations
carry the rule tag C1..C12 they break, or ``horizon`` / ``makespan`` for a
train ending after the horizon and a misreported objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from sutp.domain import Instance, ceil_div
from sutp.schedule import Schedule, groups_from_splits
from sutp.topology import all_paths


class StructuralError(ValueError):
    """The schedule references trains or equipment that do not exist."""


@dataclass
class Violation:
    constraint: str
    entities: tuple[str, ...]
    message: str
    slack: int | None = None

    def __str__(self):
        extra = "" if self.slack is None else f" (slack {self.slack})"
        return f"{self.constraint} {', '.join(self.entities)}: {self.message}{extra}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def tags(self) -> set[str]:
        return {v.constraint for v in self.violations}

    def add(self, tag, entities, message, slack=None):
        self.violations.append(Violation(tag, tuple(entities), message, slack))


def _check_structure(instance: Instance, schedule: Schedule):
    port = instance.port
    expected = {u.id for u in instance.units}
    seen = [a.train_id for a in schedule.trains]
    unknown = set(seen) - expected
    if unknown:
        raise StructuralError(f"unknown unit trains {sorted(unknown)}")
    if len(seen) != len(set(seen)):
        raise StructuralError("a unit train appears twice")
    missing = expected - set(seen)
    if missing:
        raise StructuralError(f"unit trains without an assignment {sorted(missing)}")
    paths = {f.path_id for f in all_paths(port)}
    for a in schedule.trains:
        try:
            port.dumper(a.dumper)
            port.stacker(a.stacker)
            port.stockpile(a.stockpile)
        except KeyError as e:
            raise StructuralError(f"train {a.train_id} uses unknown equipment {e}") from None
        for c in a.conveyors:
            if not port.has_conveyor(c):
                raise StructuralError(f"train {a.train_id} uses unknown conveyor {c}")
        if a.path_id not in paths:
            raise StructuralError(f"train {a.train_id} uses unknown path {a.path_id}")
    for big in instance.big_trains:
        flags = schedule.splits.get(big.id)
        if flags is None or len(flags) != big.length - 1 or any(f not in (0, 1) for f in flags):
            raise StructuralError(f"big train {big.id}: split flags missing or malformed")


def validate(instance: Instance, schedule: Schedule) -> ValidationReport:
    """Check every rule; raises :class:`StructuralError` on dangling references."""
    _check_structure(instance, schedule)
    port = instance.port
    report = ValidationReport()
    by_id = schedule.by_id()
    flows = {f.path_id: f for f in all_paths(port)}

    # groups, release times and clearances from the split flags
    clearance: dict[str, int] = {}
    for big in instance.big_trains:
        flags = schedule.splits[big.id]
        groups = groups_from_splits(big.length, flags)
        release = big.arrival + port.transport_minutes + port.split_minutes * sum(flags)
        for members in groups:
            ids = [big.units[i].id for i in members]
            recorded = {by_id[t].group for t in ids}
            # C2: recorded group membership must be a contiguous run of the composition
            if len(recorded) != 1:
                report.add("C2", ids, "unit trains of one group carry different group ids")
            dumpers = {by_id[t].dumper for t in ids}
            if len(dumpers) != 1:
                report.add("C5", ids, f"group spread over dumpers {sorted(dumpers)}")
            dumper = port.dumper(by_id[ids[0]].dumper)
            if len(ids) != dumper.group_length:
                report.add("C7", ids, f"group of {len(ids)} on {dumper.id} "
                                      f"(takes {dumper.group_length})")
            for a_id, b_id in zip(ids, ids[1:]):
                gap = by_id[b_id].start - by_id[a_id].end
                if gap != 0:
                    report.add("C6", (a_id, b_id), "not processed back to back", gap)
            for pos, t in enumerate(ids):
                d = port.dumper(by_id[t].dumper)
                last = pos == len(ids) - 1
                clearance[t] = d.clear_minutes if (d.group_length == 1 or last) else 0
        group_ids = [by_id[u.id].group for u in big.units]
        runs = []
        for gid in group_ids:
            if not runs or runs[-1] != gid:
                runs.append(gid)
        if len(runs) != len(set(runs)):
            report.add("C2", [u.id for u in big.units], "a group is not a contiguous run")
        for u in big.units:
            a = by_id[u.id]
            if a.start < big.arrival + port.transport_minutes:
                report.add("C4", (u.id,), "starts before reaching the port",
                           a.start - big.arrival - port.transport_minutes)
            elif a.start < release:
                report.add("C3", (u.id,), "starts before the split plan is done",
                           a.start - release)

    for big in instance.big_trains:
        for u in big.units:
            a = by_id[u.id]
            d = port.dumper(a.dumper)
            if not d.accepts(u.train_type, u.cargo_type, u.height_class):
                report.add("C8", (u.id, d.id), "dumper does not accept this train")
            route = (a.dumper, *a.conveyors, a.stacker)
            if any(b not in port.successors(x) for x, b in zip(route, route[1:])):
                report.add("C9", (u.id,), f"route {'->'.join(route)} is not connected")
            elif flows[a.path_id].route != route:
                report.add("C9", (u.id,), f"path id {a.path_id} names another route")
            pile = port.stockpile(a.stockpile)
            if pile.cargo_type != u.cargo_type:
                report.add("C10", (u.id, pile.id), "stockpile holds another cargo type")
            if a.stockpile not in port.stacker(a.stacker).stockpiles:
                report.add("C12", (u.id, a.stacker, a.stockpile), "stacker cannot reach stockpile")
            rates = port.rates_for(route)
            if u.train_type not in rates:
                report.add("C11", (u.id,), f"no rate for train type {u.train_type}")
            else:
                expected = ceil_div(u.load * 60, rates[u.train_type])
                if a.end - a.start != expected:
                    report.add("C11", (u.id,), f"duration {a.end - a.start}, expected {expected}",
                               a.end - a.start - expected)

    loads: dict[str, int] = {}
    for u in instance.units:
        p = by_id[u.id].stockpile
        loads[p] = loads.get(p, 0) + u.load
    for p, total in sorted(loads.items()):
        cap = port.stockpile(p).capacity
        if total > cap:
            report.add("C10", (p,), f"{total} t stored, capacity {cap} t", cap - total)

    # C1: one train at a time on every piece of equipment, dumper clearance included
    usage: dict[str, list[tuple[int, int, str]]] = {}
    for a in schedule.trains:
        usage.setdefault(a.dumper, []).append((a.start, a.end + clearance[a.train_id], a.train_id))
        for x in (*a.conveyors, a.stacker, a.stockpile):
            usage.setdefault(x, []).append((a.start, a.end, a.train_id))
    for eq, windows in sorted(usage.items()):
        windows.sort()
        busy_until, holder = None, None
        for s2, e2, t2 in windows:
            if busy_until is not None and s2 < busy_until:
                report.add("C1", (eq, holder, t2), "overlapping use", s2 - busy_until)
            if busy_until is None or e2 > busy_until:
                busy_until, holder = e2, t2

    for a in schedule.trains:
        if a.end > instance.horizon:
            report.add("horizon", (a.train_id,), f"ends at {a.end}, horizon {instance.horizon}",
                       instance.horizon - a.end)
    if schedule.makespan != schedule.recomputed_makespan():
        report.add("makespan", (), f"reported {schedule.makespan}, "
                                   f"latest end {schedule.recomputed_makespan()}")
    return report
