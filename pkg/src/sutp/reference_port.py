"""A synthetic full-size port built to fixed aggregate counts.

The equipment layout and compatibilities are made up; only the counts are
guaranteed: 13 dumpers, 62 conveyors, 19 stackers, 168 stockpiles,
42 cargo types, 89 routes (79 for C80, 10 shared by C70/C64) and 13
equipment-disjoint routes.
"""

from __future__ import annotations

from functools import lru_cache

from sutp.domain import (
    HIGH,
    LOW,
    Conveyor,
    Dumper,
    PortTopology,
    Stacker,
    Stockpile,
)

TRAIN_TYPES = ("C80", "C70", "C64")
CARGO_TYPES = tuple(f"K{j:02d}" for j in range(1, 43))
N_STACKERS = 19

# (routes through first branch, routes through second branch, first stacker offset)
_DUMPER_LAYOUT = {
    1: (4, 4, 10), 2: (4, 4, 14), 3: (4, 4, 18), 4: (4, 4, 3), 5: (4, 4, 7), 6: (4, 4, 11),
    7: (2, 1, 0), 8: (2, 1, 3), 9: (2, 2, 6),
    10: (4, 4, 15), 11: (4, 4, 0), 12: (4, 4, 4), 13: (4, 3, 8),
}
# unloading rates (t/h): 5000 t takes 85/90/95 min on CD1-CD9, 57/60/63 min on CD10-CD13
_RATES = {1: 3334, 2: 3530, 3: 3158, 4: 3334, 5: 3530, 6: 3158, 7: 3334, 8: 3530, 9: 3158,
          10: 5264, 11: 5000, 12: 4762, 13: 5000}


def _dumper(k: int) -> Dumper:
    old = k <= 9
    types = {"C70", "C64"} if k in (7, 8, 9) else {"C80"}
    heights = {LOW} if k in (1, 2) else {LOW, HIGH}
    # each dumper refuses roughly one cargo type in seven
    cargo = frozenset(c for j, c in enumerate(CARGO_TYPES, start=1) if (j + k) % 7 != 0)
    rate = _RATES[k]
    return Dumper(
        id=f"CD{k}",
        train_types=frozenset(types),
        cargo_types=cargo,
        height_classes=frozenset(heights),
        group_length=1 if old else 2,
        clear_minutes=60 if old else 45,
        rates={t: rate for t in TRAIN_TYPES},
    )


def _stacker_of_pile(n: int) -> tuple[int, ...]:
    j, c = divmod(n, 4)
    if c == 0:
        first = j % 10
    elif c == 1:
        first = (j + 5) % 10
    elif c == 2:
        first = 10 + j % 9
    else:
        first = (7 * j + 3) % N_STACKERS
    if n % 3 == 0:
        return first, (first + 1) % N_STACKERS
    return (first,)


@lru_cache(maxsize=1)
def build_reference_port() -> PortTopology:
    dumpers = tuple(_dumper(k) for k in range(1, 14))
    stackers_ids = [f"ST{i + 1:02d}" for i in range(N_STACKERS)]
    feeders = [f"Q{i + 1:02d}" for i in range(N_STACKERS)]

    conveyors: list[str] = []
    links: list[tuple[str, str]] = []
    for k in range(1, 14):
        n_a, n_b, offset = _DUMPER_LAYOUT[k]
        head = f"F{k:02d}"
        conveyors.append(head)
        links.append((f"CD{k}", head))
        if k >= 10:
            transfer = f"X{k:02d}"
            conveyors.append(transfer)
            links.append((head, transfer))
            head = transfer
        slot = offset
        for branch, width in (("a", n_a), ("b", n_b)):
            mid = f"M{k:02d}{branch}"
            conveyors.append(mid)
            links.append((head, mid))
            for _ in range(width):
                links.append((mid, feeders[slot % N_STACKERS]))
                slot += 1
    conveyors.extend(feeders)
    links.extend((q, s) for q, s in zip(feeders, stackers_ids))

    reach: dict[int, list[str]] = {i: [] for i in range(N_STACKERS)}
    piles = []
    for n in range(168):
        pid = f"P{n + 1:03d}"
        cargo = CARGO_TYPES[n // 4]
        piles.append(Stockpile(pid, cargo, 15000 + ((n * 37) % 6) * 5000))
        for s in _stacker_of_pile(n):
            reach[s].append(pid)

    return PortTopology(
        dumpers=dumpers,
        conveyors=tuple(Conveyor(c) for c in conveyors),
        stackers=tuple(Stacker(stackers_ids[i], tuple(reach[i])) for i in range(N_STACKERS)),
        stockpiles=tuple(piles),
        links=tuple(links),
        transport_minutes=90,
        split_minutes=30,
    )
