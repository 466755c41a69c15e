"""Route enumeration and the static analyses of a port graph."""

from __future__ import annotations

import networkx as nx

from sutp.domain import EquipmentFlow, PortTopology

# average unloading hours of a unit train by dumper group length
AVERAGE_PROCESSING_HOURS = {1: 1.5, 2: 1.0}


def _all_flows(port: PortTopology) -> tuple[EquipmentFlow, ...]:
    cached = port._flows
    if cached is not None:
        return cached
    stackers = {s.id for s in port.stackers}
    order = {d.id: i for i, d in enumerate(port.dumpers)}
    order.update({c.id: i for i, c in enumerate(port.conveyors)})
    order.update({s.id: i for i, s in enumerate(port.stackers)})

    routes = []
    for d in port.dumpers:
        stack = [(d.id,)]
        while stack:
            route = stack.pop()
            for nxt in port.successors(route[-1]):
                if nxt in stackers:
                    routes.append(route + (nxt,))
                else:
                    stack.append(route + (nxt,))
    # equipment compared by declaration position, dumper first
    routes.sort(key=lambda r: (order[r[0]], tuple(order[x] for x in r[1:-1]), order[r[-1]]))
    flows = []
    for pid, route in enumerate(routes):
        dumper = port.dumper(route[0])
        flows.append(EquipmentFlow(
            path_id=pid,
            dumper_id=route[0],
            conveyor_ids=route[1:-1],
            stacker_id=route[-1],
            train_types=dumper.train_types,
            rates=dict(port.rates_for(route)),
        ))
    flows = tuple(flows)
    object.__setattr__(port, "_flows", flows)
    return flows


def all_paths(port: PortTopology) -> tuple[EquipmentFlow, ...]:
    """Every dumper->stacker route of the port, indexed by path id."""
    return _all_flows(port)


def enumerate_feasible_paths(port: PortTopology, train_type: str | None = None,
                             cargo_type: str | None = None,
                             height_class: str | None = None) -> list[EquipmentFlow]:
    """Routes whose dumper accepts the given train.

    A ``None`` filter pools over all values. Path ids are global to the port,
    so filtered results keep the ids of the full enumeration.
    """
    return [f for f in _all_flows(port)
            if port.dumper(f.dumper_id).accepts(train_type, cargo_type, height_class)]


def max_unit_capacity_flow(port: PortTopology) -> int:
    """Number of equipment-disjoint dumper->stacker routes.

    Every dumper, conveyor and stacker is split into an in/out node pair
    joined by a unit-capacity arc.
    """
    g = nx.DiGraph()
    equipment = ([d.id for d in port.dumpers] + [c.id for c in port.conveyors]
                 + [s.id for s in port.stackers])
    for node in equipment:
        g.add_edge(("in", node), ("out", node), capacity=1)
    for d in port.dumpers:
        g.add_edge("source", ("in", d.id), capacity=1)
    for s in port.stackers:
        g.add_edge(("out", s.id), "sink", capacity=1)
    for a, b in port.links:
        g.add_edge(("out", a), ("in", b), capacity=1)
    if not port.dumpers or not port.stackers:
        return 0
    return int(nx.maximum_flow_value(g, "source", "sink"))


def naive_upper_bound(port: PortTopology, horizon_hours: float,
                      processing_hours: dict[int, float] | None = None) -> float:
    """Unit trains the dumpers could process in ``horizon_hours`` ignoring compatibility.

    Each dumper cycles through one average processing time plus its clearance
    per unit train.
    """
    if horizon_hours < 0:
        raise ValueError("horizon must be nonnegative")
    hours = processing_hours or AVERAGE_PROCESSING_HOURS
    total = 0.0
    for d in port.dumpers:
        total += horizon_hours / (hours[d.group_length] + d.clear_minutes / 60)
    return total
