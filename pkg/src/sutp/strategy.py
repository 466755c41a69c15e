"""PathThenStart: choose every train's flow and stockpile, then order the starts.

Phase 1 walks the trains by earliest release. For the chosen train it tries
the path whose dumper frees up first, then the stockpile that frees up first.
Phase 2 starts once every flow is fixed. It looks for two trains that would
overlap on a shared resource if both started at their earliest time, and
branches on which of the two goes first. When no such pair is left, every
start can take its minimum at once, which is the best schedule of the subtree.
"""

from __future__ import annotations

import random

from sutp.cp.search import Decision
from sutp.model import SutpModel, TrainVars


class PathThenStart:
    def __init__(self, model: SutpModel, rng: random.Random | None = None):
        self.model = model
        self.s = model.solver
        self.rng = rng
        port = model.instance.port
        self.arrival = [model.instance.big_trains[t.big_index].arrival for t in model.trains]
        self.dumper_of = {f.path_id: f.dumper_id for t in model.trains for f in t.flows}
        self.dumper_clear = {d.id: (d.clear_minutes if d.group_length == 1 else None)
                             for d in port.dumpers}
        self.pile_rank = {p.id: i for i, p in enumerate(port.stockpiles)}
        others = []
        for big_splits in model.splits.values():
            others.extend(big_splits)
        for t in model.trains:
            others.extend((t.alone, t.clear, t.duration))
        self.others = others

    # helpers --------------------------------------------------------------------
    def _order_key(self, t: TrainVars):
        return (self.s.lo[t.start], self.arrival[t.index], t.index)

    def _tie(self, fallback: int):
        return self.rng.random() if self.rng is not None else fallback

    def _pile_fixed(self, t: TrainVars) -> bool:
        lo = self.s.lo
        return any(lo[b] for b in t.pile.values())

    def dumper_calendar(self) -> dict[str, int]:
        """Earliest moment each dumper is free of the trains already routed to it.

        The routed trains are replayed one after another in start order, so a
        dumper whose trains still share the same earliest start is not
        mistaken for an idle one.
        """
        s = self.s
        lo, hi = s.lo, s.hi
        queues: dict[str, list] = {}
        for t in self.model.trains:
            if lo[t.path] != hi[t.path]:
                continue
            d = self.dumper_of[lo[t.path]]
            clr = self.dumper_clear[d]
            queues.setdefault(d, []).append(
                (lo[t.start], t.index, lo[t.duration] + (lo[t.clear] if clr is None else clr)))
        cal: dict[str, int] = {}
        for d, queue in queues.items():
            busy = 0
            for start, _, length in sorted(queue):
                busy = max(busy, start) + length
            cal[d] = busy
        return cal

    def pile_calendar(self) -> dict[str, int]:
        lo = self.s.lo
        cal: dict[str, int] = {}
        for t in self.model.trains:
            for p, b in t.pile.items():
                if lo[b] and lo[t.end] > cal.get(p, -1):
                    cal[p] = lo[t.end]
        return cal

    # decisions -------------------------------------------------------------------
    def next_decision(self) -> Decision | None:
        s = self.s
        lo, hi = s.lo, s.hi
        pending = [t for t in self.model.trains
                   if lo[t.path] != hi[t.path] or not self._pile_fixed(t)]
        if pending:
            t = min(pending, key=self._order_key)
            if lo[t.path] != hi[t.path]:
                return self._path_decision(t)
            return self._pile_decision(t)
        for v in self.others:
            if lo[v] != hi[v]:
                a = lo[v]
                return Decision(lambda v=v, a=a: s.assign(v, a),
                                lambda v=v, a=a: s.remove(v, a), f"{s.names[v]}={a}")
        conflict = self.find_conflict()
        if conflict is not None:
            return conflict
        starts = [t.start for t in self.model.trains if lo[t.start] != hi[t.start]]
        if not starts:
            return None

        def left():
            for v in starts:
                s.assign(v, lo[v])

        first = starts[0]
        # every start at its minimum is the best schedule below this node; the
        # right branch only matters if that assignment were ever refuted
        return Decision(left, lambda: s.set_min(first, lo[first] + 1), "earliest starts")

    def _path_decision(self, t: TrainVars) -> Decision:
        s = self.s
        cal = self.dumper_calendar()
        choices = list(s.values(t.path))
        best = min(choices, key=lambda p: (cal.get(self.dumper_of[p], 0), self._tie(p), p))
        return Decision(lambda: s.assign(t.path, best), lambda: s.remove(t.path, best),
                        f"path[{t.id}]={best}")

    def _pile_decision(self, t: TrainVars) -> Decision:
        s = self.s
        cal = self.pile_calendar()
        options = [p for p, b in t.pile.items() if s.hi[b]]
        best = min(options, key=lambda p: (cal.get(p, 0), self._tie(self.pile_rank[p]),
                                           self.pile_rank[p]))
        b = t.pile[best]
        return Decision(lambda: s.assign(b, 1), lambda: s.assign(b, 0), f"pile[{t.id}]={best}")

    def group_heads(self) -> list[int]:
        """For each train, the index of the first train of its group (splits fixed)."""
        lo = self.s.lo
        head = []
        for t in self.model.trains:
            cuts = self.model.splits[t.unit.big_train_id]
            i = t.unit.index
            head.append(head[t.index - 1] if i > 0 and lo[cuts[i - 1]] == 0 else t.index)
        return head

    def find_conflict(self) -> Decision | None:
        """Two trains overlapping at their earliest starts on one resource.

        Conflicts are ranked by the earliest start of the groups involved, and
        the train whose group starts first is tried first, so that an unsplit
        pair is placed as one block.
        """
        s = self.s
        lo = s.lo
        trains = self.model.trains
        head = self.group_heads()
        rank = [(lo[trains[head[k]].start], k) for k in range(len(trains))]
        best = None
        for res in self.model.resources:
            acts = [(lo[a.start], res.trains[k], a) for k, a in enumerate(res.activities)
                    if lo[a.usage]]
            if len(acts) < 2:
                continue
            acts.sort(key=lambda x: (x[0], x[1]))
            for (est_i, ti, ai), (est_j, tj, aj) in zip(acts, acts[1:]):
                if est_j < lo[ai.end] + _clear(s, ai):
                    first, second = (ai, aj) if rank[ti] <= rank[tj] else (aj, ai)
                    key = (min(rank[ti], rank[tj]), max(rank[ti], rank[tj]))
                    if best is None or key < best[0]:
                        best = (key, first, second)
                    break
        if best is None:
            return None
        _, a, b = best
        free_a = lo[a.end] + _clear(s, a)
        free_b = lo[b.end] + _clear(s, b)
        names = s.names
        return Decision(lambda: s.set_min(b.start, free_a),
                        lambda: s.set_min(a.start, free_b),
                        f"{names[a.start]} before {names[b.start]}")


def _clear(s, act) -> int:
    return act.clearance if act.clearance_var is None else s.lo[act.clearance_var]
