"""Exhaustive optimum for tiny instances, written without the CP machinery.

Every split plan, dumper per group, route per unit train and stockpile per
unit train is enumerated. For a fixed choice, each pair of unit trains that
share equipment must be ordered one way or the other; the orders are
enumerated depth first and the earliest start times for a set of orders come
from longest paths in a difference-constraint graph (Bellman-Ford).
"""

from __future__ import annotations

from itertools import product

from sutp.domain import Instance, UnitTrain, ceil_div
from sutp.schedule import Schedule, TrainAssignment, groups_from_splits
from sutp.topology import all_paths

MAX_BIG_TRAINS = 3
MAX_UNITS = 6
MAX_PATHS = 12
MAX_PILES = 8


class OracleTooLarge(ValueError):
    pass


def _routes(port) -> list[tuple[str, ...]]:
    stackers = {s.id for s in port.stackers}
    found = []

    def walk(route):
        for nxt in port.successors(route[-1]):
            if nxt in stackers:
                found.append(route + (nxt,))
            else:
                walk(route + (nxt,))

    for d in port.dumpers:
        walk((d.id,))
    return found


def _split_plans(big, port):
    """(splits, dumper per unit, clearance per unit) for every legal grouping."""
    n = big.length
    plans = []
    for splits in product((0, 1), repeat=n - 1):
        groups = groups_from_splits(n, list(splits))
        if any(len(g) > 2 for g in groups):
            continue
        options = []
        for g in groups:
            units = [big.units[i] for i in g]
            options.append([d for d in port.dumpers if d.group_length == len(g)
                            and all(d.accepts(u.train_type, u.cargo_type, u.height_class)
                                    for u in units)])
        for choice in product(*options):
            dumper = [None] * n
            clear = [0] * n
            for g, d in zip(groups, choice):
                for pos, i in enumerate(g):
                    dumper[i] = d
                    clear[i] = d.clear_minutes if pos == len(g) - 1 else 0
            plans.append((list(splits), dumper, clear))
    return plans


def _longest_paths(n, release, arcs, horizon_start):
    """Earliest starts satisfying start_v >= start_u + w; None on a positive cycle."""
    start = list(release)
    for _ in range(n + 1):
        changed = False
        for u, v, w in arcs:
            if start[u] + w > start[v]:
                start[v] = start[u] + w
                changed = True
        if not changed:
            return start
    return None


def brute_force_optimal(instance: Instance) -> tuple[int | None, Schedule | None]:
    """The optimal makespan and one optimal schedule, or (None, None) if infeasible."""
    port = instance.port
    units: list[UnitTrain] = list(instance.units)
    routes = _routes(port)
    if (len(instance.big_trains) > MAX_BIG_TRAINS or len(units) > MAX_UNITS
            or len(routes) > MAX_PATHS or len(port.stockpiles) > MAX_PILES):
        raise OracleTooLarge("instance exceeds the oracle size bounds")
    path_id = {f.route: f.path_id for f in all_paths(port)}
    n = len(units)
    pos = {u.id: k for k, u in enumerate(units)}
    bigs = instance.big_trains

    best = [None, None]  # makespan, schedule

    def evaluate(splits, dumpers, clears, route_of, pile_of):
        release, dur = [], []
        for k, u in enumerate(units):
            big = instance.big_train(u.big_train_id)
            cuts = sum(splits[big.id])
            release.append(big.arrival + port.transport_minutes + port.split_minutes * cuts)
            rate = port.rates_for(route_of[k])[u.train_type]
            dur.append(ceil_div(u.load * 60, rate))
        arcs = []
        for big in bigs:
            for i, flag in enumerate(splits[big.id]):
                if not flag:
                    a, b = pos[big.units[i].id], pos[big.units[i + 1].id]
                    arcs.append((a, b, dur[a]))
                    arcs.append((b, a, -dur[a]))
        equipment = [set(route_of[k]) | {pile_of[k]} for k in range(n)]
        pairs = []
        for a in range(n):
            for b in range(a + 1, n):
                shared = equipment[a] & equipment[b]
                if shared:
                    on_dumper = route_of[a][0] in shared
                    pairs.append((a, b, dur[a] + (clears[a] if on_dumper else 0),
                                  dur[b] + (clears[b] if on_dumper else 0)))

        def dive(i, arcs):
            start = _longest_paths(n, release, arcs, 0)
            if start is None:
                return
            span = max(start[k] + dur[k] for k in range(n))
            if span > instance.horizon or (best[0] is not None and span >= best[0]):
                return
            if i == len(pairs):
                best[0] = span
                best[1] = (start, dur, dict(splits), list(dumpers), list(clears),
                           list(route_of), list(pile_of))
                return
            a, b, wa, wb = pairs[i]
            dive(i + 1, arcs + [(a, b, wa)])
            dive(i + 1, arcs + [(b, a, wb)])

        dive(0, arcs)

    per_big = [_split_plans(big, port) for big in bigs]
    for combo in product(*per_big):
        splits = {big.id: plan[0] for big, plan in zip(bigs, combo)}
        dumpers = [d for plan in combo for d in plan[1]]
        clears = [c for plan in combo for c in plan[2]]
        route_options = []
        for k, u in enumerate(units):
            route_options.append([r for r in routes if r[0] == dumpers[k].id])
        for route_of in product(*route_options):
            pile_options = []
            for k, u in enumerate(units):
                reach = port.stacker(route_of[k][-1]).stockpiles
                pile_options.append([p for p in reach
                                     if port.stockpile(p).cargo_type == u.cargo_type])
            for pile_of in product(*pile_options):
                load: dict[str, int] = {}
                for k, p in enumerate(pile_of):
                    load[p] = load.get(p, 0) + units[k].load
                if any(v > port.stockpile(p).capacity for p, v in load.items()):
                    continue
                evaluate(splits, dumpers, clears, route_of, pile_of)

    if best[0] is None:
        return None, None
    start, dur, splits, dumpers, clears, route_of, pile_of = best[1]
    trains = []
    for k, u in enumerate(units):
        big = instance.big_train(u.big_train_id)
        groups = groups_from_splits(big.length, splits[big.id])
        group = next(g for g, members in enumerate(groups) if u.index in members)
        route = route_of[k]
        trains.append(TrainAssignment(
            train_id=u.id, big_train=u.big_train_id, index=u.index, start=start[k],
            end=start[k] + dur[k], path_id=path_id[route], dumper=route[0],
            conveyors=route[1:-1], stacker=route[-1], stockpile=pile_of[k],
            clearance=clears[k], group=group,
        ))
    return best[0], Schedule(trains, splits, best[0], "optimal")
