"""Bounds-consistent arithmetic constraints."""

from __future__ import annotations

from typing import Sequence

from sutp.cp.kernel import Inconsistent, Propagator, Solver


class LessEqual(Propagator):
    """x + offset <= y."""

    idempotent = True

    def __init__(self, x: int, y: int, offset: int = 0):
        self.x, self.y, self.c = x, y, offset

    def attach(self, s):
        self.s = s
        s.watch(self.x, self)
        s.watch(self.y, self)

    def propagate(self):
        s = self.s
        s.set_min(self.y, s.lo[self.x] + self.c)
        s.set_max(self.x, s.hi[self.y] - self.c)


class Equal(Propagator):
    """x == y + offset."""

    def __init__(self, x: int, y: int, offset: int = 0):
        self.x, self.y, self.c = x, y, offset

    def attach(self, s):
        self.s = s
        s.watch(self.x, self)
        s.watch(self.y, self)

    def propagate(self):
        s, x, y, c = self.s, self.x, self.y, self.c
        s.set_min(x, s.lo[y] + c)
        s.set_max(x, s.hi[y] + c)
        s.set_min(y, s.lo[x] - c)
        s.set_max(y, s.hi[x] - c)
        if s.bits[x] is not None or s.bits[y] is not None:
            for a in list(s.values(x)):
                if not s.contains(y, a - c):
                    s.remove(x, a)
            for a in list(s.values(y)):
                if not s.contains(x, a + c):
                    s.remove(y, a)


class IntervalSum(Propagator):
    """end == start + duration."""

    idempotent = True

    def __init__(self, start: int, duration: int, end: int):
        self.start, self.dur, self.end = start, duration, end

    def attach(self, s):
        self.s = s
        for v in (self.start, self.dur, self.end):
            s.watch(v, self)

    def propagate(self):
        s, st, d, e = self.s, self.start, self.dur, self.end
        lo, hi = s.lo, s.hi
        while True:
            changed = s.set_min(e, lo[st] + lo[d])
            changed |= s.set_max(e, hi[st] + hi[d])
            changed |= s.set_min(st, lo[e] - hi[d])
            changed |= s.set_max(st, hi[e] - lo[d])
            changed |= s.set_min(d, lo[e] - hi[st])
            changed |= s.set_max(d, hi[e] - lo[st])
            if not changed:
                return


class MaxOf(Propagator):
    """objective == max(xs)."""

    def __init__(self, objective: int, xs: Sequence[int]):
        if not xs:
            raise ValueError("max of an empty set")
        self.obj, self.xs = objective, list(xs)

    def attach(self, s):
        self.s = s
        s.watch(self.obj, self)
        for x in self.xs:
            s.watch(x, self)

    def propagate(self):
        s, obj, xs = self.s, self.obj, self.xs
        lo, hi = s.lo, s.hi
        s.set_min(obj, max(lo[x] for x in xs))
        s.set_max(obj, max(hi[x] for x in xs))
        top = hi[obj]
        for x in xs:
            if hi[x] > top:
                s.set_max(x, top)
        # the max must be reached by some x
        low = lo[obj]
        candidates = [x for x in xs if hi[x] >= low]
        if not candidates:
            raise Inconsistent()
        if len(candidates) == 1:
            s.set_min(candidates[0], low)


class LinearCapacity(Propagator):
    """sum(weights[i] * bools[i]) <= capacity, weights positive."""

    idempotent = True

    def __init__(self, bools: Sequence[int], weights: Sequence[int], capacity: int):
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        self.bools, self.weights, self.cap = list(bools), list(weights), capacity

    def attach(self, s):
        self.s = s
        for b in self.bools:
            s.watch(b, self)

    def propagate(self):
        s = self.s
        lo, hi = s.lo, s.hi
        used = 0
        for b, w in zip(self.bools, self.weights):
            if lo[b]:
                used += w
        if used > self.cap:
            raise Inconsistent()
        slack = self.cap - used
        for b, w in zip(self.bools, self.weights):
            if w > slack and hi[b] and not lo[b]:
                s.assign(b, 0)


class GuardedChain(Propagator):
    """guard == 0 implies start_b == end_a; impossible equality forces guard to 1."""

    def __init__(self, guard: int, end_a: int, start_b: int):
        self.g, self.a, self.b = guard, end_a, start_b

    def attach(self, s):
        self.s = s
        for v in (self.g, self.a, self.b):
            s.watch(v, self)

    def propagate(self):
        s, g, a, b = self.s, self.g, self.a, self.b
        lo, hi = s.lo, s.hi
        if lo[g] == 1:
            return
        if hi[a] < lo[b] or hi[b] < lo[a]:
            s.assign(g, 1)
            return
        if hi[g] == 0:
            s.set_min(b, lo[a])
            s.set_max(b, hi[a])
            s.set_min(a, lo[b])
            s.set_max(a, hi[b])


class Release(Propagator):
    """base + step * sum(bools) <= start."""

    idempotent = True

    def __init__(self, start: int, base: int, step: int, bools: Sequence[int]):
        self.start, self.base, self.step, self.bools = start, base, step, list(bools)

    def attach(self, s):
        self.s = s
        s.watch(self.start, self)
        for b in self.bools:
            s.watch(b, self)

    def propagate(self):
        s = self.s
        lo = s.lo
        ones = sum(lo[b] for b in self.bools)
        s.set_min(self.start, self.base + self.step * ones)
        if self.step > 0 and self.bools:
            room = (s.hi[self.start] - self.base) // self.step - ones
            if room < 0:
                raise Inconsistent()
            if room == 0:
                for b in self.bools:
                    if not lo[b]:
                        s.assign(b, 0)


class GuardedEqual(Propagator):
    """Usage-guarded link between a train's interval and a local copy.

    The local copy always stays within the global bounds; an empty
    intersection rejects the usage instead of failing. Once the usage holds,
    the two are equal.
    """

    idempotent = True

    def __init__(self, usage: int, glob: int, local: int):
        self.u, self.g, self.l = usage, glob, local

    def wants(self, tag):
        return self.s.hi[self.u] == 1

    def attach(self, s):
        self.s = s
        for v in (self.u, self.g, self.l):
            s.watch(v, self)

    def propagate(self):
        s, u, g, l = self.s, self.u, self.g, self.l
        lo, hi = s.lo, s.hi
        if hi[u] == 0:
            return
        if lo[u] == 1:
            s.set_min(l, lo[g])
            s.set_max(l, hi[g])
            s.set_min(g, lo[l])
            s.set_max(g, hi[l])
            return
        if hi[g] < lo[l] or hi[l] < lo[g]:
            s.assign(u, 0)
            return
        s.set_min(l, lo[g])
        s.set_max(l, hi[g])


class MinLink(Propagator):
    """Global bounds from the local copies of an exactly-one resource class.

    Exactly one usage in ``usages`` holds, so the global start is at least the
    smallest local start among the possible ones, and the global end at most
    the largest local end.
    """

    idempotent = True

    def __init__(self, start: int, end: int, usages: Sequence[int],
                 local_starts: Sequence[int], local_ends: Sequence[int]):
        self.start, self.end = start, end
        self.items = list(zip(usages, local_starts, local_ends))

    def attach(self, s):
        self.s = s
        for u, ls, le in self.items:
            s.watch(u, self)
            s.watch(ls, self)
            s.watch(le, self)

    def propagate(self):
        s = self.s
        lo, hi = s.lo, s.hi
        best_start = None
        best_end = None
        for u, ls, le in self.items:
            if hi[u] == 0:
                continue
            if best_start is None or lo[ls] < best_start:
                best_start = lo[ls]
            if best_end is None or hi[le] > best_end:
                best_end = hi[le]
        if best_start is None:
            raise Inconsistent()
        s.set_min(self.start, best_start)
        s.set_max(self.end, best_end)


def post_linear_capacity(s: Solver, bools, weights, capacity) -> Propagator:
    return s.post(LinearCapacity(bools, weights, capacity))


def post_guarded_chain(s: Solver, guard: int, end_a: int, start_b: int) -> Propagator:
    return s.post(GuardedChain(guard, end_a, start_b))


def post_max(s: Solver, objective: int, xs: Sequence[int]) -> Propagator:
    return s.post(MaxOf(objective, xs))


__all__ = [
    "Equal",
    "GuardedChain",
    "GuardedEqual",
    "IntervalSum",
    "LessEqual",
    "LinearCapacity",
    "MaxOf",
    "MinLink",
    "Release",
    "post_guarded_chain",
    "post_linear_capacity",
    "post_max",
]
