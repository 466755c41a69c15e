"""Unary resources over optional activities.

An activity occupies its resource during ``[start, end + clearance)`` when its
usage bool holds. Both variants share the reasoning between two activities
that are certainly on the resource (detectable precedences, which also
subsume timetabling of compulsory parts on a unary resource). They differ in
what an optional activity can learn:

* :class:`UnarySingle` works on the train's single global interval. For an
  optional activity it only asks whether some order with each mandatory
  activity still exists, and drops the usage when none does.
* :class:`UnaryMulti` gives every activity a local copy of its interval on
  this resource, linked to the global one by usage-guarded equalities. The
  local copy can be pruned while the usage is undecided.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from sutp.cp.arith import GuardedEqual, MinLink
from sutp.cp.kernel import RESOURCE, Inconsistent, Propagator, Solver


@dataclass
class OptionalActivity:
    """Occupies ``[start, end + clearance)`` when ``usage`` is 1.

    ``clearance`` is either a fixed number of minutes or a variable, in which
    case its lower bound is used. ``duration`` is only needed by the
    multi-interval variant to keep its local copy consistent.
    """

    start: int
    end: int
    usage: int
    clearance: int = 0
    clearance_var: int | None = None
    duration: int | None = None
    label: str = ""


class _UnaryBase(Propagator):
    priority = RESOURCE

    def __init__(self, resource, activities: Sequence[OptionalActivity]):
        self.resource = resource
        self.acts = list(activities)

    def _clear(self, k: int) -> int:
        a = self.acts[k]
        if a.clearance_var is None:
            return a.clearance
        return self.s.lo[a.clearance_var]

    def wants(self, tag: int) -> bool:
        # nothing to learn from an activity that left the resource
        return self.s.hi[self.usages[tag]] == 1


class UnarySingle(_UnaryBase):
    """Unary resource reasoning on the trains' global intervals."""

    def attach(self, s: Solver):
        self.s = s
        self.usages = [a.usage for a in self.acts]
        for k, a in enumerate(self.acts):
            for v in (a.start, a.end, a.usage):
                s.watch(v, self, k)
            if a.clearance_var is not None:
                s.watch(a.clearance_var, self, k)

    def propagate(self):
        s, acts = self.s, self.acts
        lo, hi = s.lo, s.hi
        live = [k for k, a in enumerate(acts) if hi[a.usage]]
        mandatory = [k for k in live if lo[acts[k].usage]]
        if not mandatory:
            return
        clr = {k: self._clear(k) for k in live}
        for x, i in enumerate(mandatory):
            ai = acts[i]
            for j in mandatory[x + 1:]:
                aj = acts[j]
                i_first = lo[ai.end] + clr[i] <= hi[aj.start]
                j_first = lo[aj.end] + clr[j] <= hi[ai.start]
                if i_first and j_first:
                    continue
                if not (i_first or j_first):
                    raise Inconsistent()
                if i_first:
                    s.set_min(aj.start, lo[ai.end] + clr[i])
                    s.set_max(ai.end, hi[aj.start] - clr[i])
                else:
                    s.set_min(ai.start, lo[aj.end] + clr[j])
                    s.set_max(aj.end, hi[ai.start] - clr[j])
        for j in live:
            aj = acts[j]
            if lo[aj.usage]:
                continue
            for i in mandatory:
                ai = acts[i]
                # where the overlap with i would push j, in either direction
                after = lo[ai.end] + clr[i]
                before = hi[ai.start] - clr[j]
                if after > hi[aj.start] and lo[aj.end] > before:
                    s.assign(aj.usage, 0)
                    break


class _LocalInterval(Propagator):
    """Keeps a local copy consistent with the duration; empties reject the usage."""

    idempotent = True

    def __init__(self, usage: int, start: int, duration: int, end: int):
        self.u, self.st, self.d, self.e = usage, start, duration, end

    def wants(self, tag):
        return self.s.hi[self.u] == 1

    def attach(self, s):
        self.s = s
        for v in (self.u, self.st, self.d, self.e):
            s.watch(v, self)

    def propagate(self):
        s, u = self.s, self.u
        if s.hi[u] == 0:
            return
        lo, hi = s.lo, s.hi
        st, d, e = self.st, self.d, self.e
        if lo[u] == 1:
            return  # the global interval sum handles it through the equalities
        new_e_lo = max(lo[e], lo[st] + lo[d])
        new_e_hi = min(hi[e], hi[st] + hi[d])
        new_s_lo = max(lo[st], new_e_lo - hi[d])
        new_s_hi = min(hi[st], new_e_hi - lo[d])
        if new_e_lo > new_e_hi or new_s_lo > new_s_hi:
            s.assign(u, 0)
            return
        s.set_min(e, new_e_lo)
        s.set_max(e, new_e_hi)
        s.set_min(st, new_s_lo)
        s.set_max(st, new_s_hi)


class UnaryMulti(_UnaryBase):
    """Unary resource reasoning on per-resource copies of the intervals."""

    def __init__(self, resource, activities, local_starts, local_ends):
        super().__init__(resource, activities)
        self.ls = list(local_starts)
        self.le = list(local_ends)

    def attach(self, s: Solver):
        self.s = s
        self.usages = [a.usage for a in self.acts]
        for k, a in enumerate(self.acts):
            for v in (self.ls[k], self.le[k], a.usage):
                s.watch(v, self, k)
            if a.clearance_var is not None:
                s.watch(a.clearance_var, self, k)

    def _shrink(self, k: int, start_min: int | None, end_max: int | None):
        """Tighten an optional local copy, rejecting the usage if it empties."""
        s = self.s
        ls, le = self.ls[k], self.le[k]
        if (start_min is not None and start_min > s.hi[ls]) or \
                (end_max is not None and end_max < s.lo[le]):
            s.assign(self.acts[k].usage, 0)
            return
        if start_min is not None:
            s.set_min(ls, start_min)
        if end_max is not None:
            s.set_max(le, end_max)

    def propagate(self):
        s, acts, ls, le = self.s, self.acts, self.ls, self.le
        lo, hi = s.lo, s.hi
        live = [k for k, a in enumerate(acts) if hi[a.usage]]
        mandatory = [k for k in live if lo[acts[k].usage]]
        if not mandatory:
            return
        clr = {k: self._clear(k) for k in live}
        for x, i in enumerate(mandatory):
            for j in mandatory[x + 1:]:
                i_first = lo[le[i]] + clr[i] <= hi[ls[j]]
                j_first = lo[le[j]] + clr[j] <= hi[ls[i]]
                if i_first and j_first:
                    continue
                if not (i_first or j_first):
                    raise Inconsistent()
                if i_first:
                    s.set_min(ls[j], lo[le[i]] + clr[i])
                    s.set_max(le[i], hi[ls[j]] - clr[i])
                else:
                    s.set_min(ls[i], lo[le[j]] + clr[j])
                    s.set_max(le[j], hi[ls[i]] - clr[j])
        for j in live:
            if lo[acts[j].usage]:
                continue
            for i in mandatory:
                if not hi[acts[j].usage]:
                    break
                after = lo[le[i]] + clr[i]
                before = hi[ls[i]] - clr[j]
                j_after = after <= hi[ls[j]]
                j_before = lo[le[j]] <= before
                if j_after and j_before:
                    continue
                if not (j_after or j_before):
                    s.assign(acts[j].usage, 0)
                elif j_after:
                    self._shrink(j, after, None)
                else:
                    self._shrink(j, None, before)


def post_unary_single_interval(s: Solver, resource, activities: Sequence[OptionalActivity]):
    return s.post(UnarySingle(resource, activities))


def post_unary_multi_interval(s: Solver, resource, activities: Sequence[OptionalActivity]):
    """Post the multi-interval variant; returns (propagator, local starts, local ends).

    Each activity needs its ``duration`` variable. The caller links the
    local copies of an exactly-one resource class back to the global
    interval with :func:`post_min_link`.
    """
    local_starts, local_ends = [], []
    for k, a in enumerate(activities):
        if a.duration is None:
            raise ValueError("multi-interval activities need a duration variable")
        tag = f"{resource}:{a.label or k}"
        ls = s.new_time_var(s.lo[a.start], s.hi[a.start], f"ls[{tag}]")
        le = s.new_time_var(s.lo[a.end], s.hi[a.end], f"le[{tag}]")
        local_starts.append(ls)
        local_ends.append(le)
        s.post(GuardedEqual(a.usage, a.start, ls))
        s.post(GuardedEqual(a.usage, a.end, le))
        s.post(_LocalInterval(a.usage, ls, a.duration, le))
    prop = s.post(UnaryMulti(resource, activities, local_starts, local_ends))
    return prop, local_starts, local_ends


def post_min_link(s: Solver, start: int, end: int, usages, local_starts, local_ends):
    return s.post(MinLink(start, end, usages, local_starts, local_ends))
