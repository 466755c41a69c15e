"""Integer variables over a trail, and the propagation fixpoint engine.

Variables are plain integer handles into the solver's parallel arrays.
Time variables keep only bounds; value variables (bools, path ids, small
enumerations) also keep a bitmask of the remaining values, bit ``a`` standing
for value ``a``. Every write records the previous domain on the trail once
per search level, so :meth:`Solver.pop` restores domains exactly.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Iterable, Iterator, NamedTuple

BOOL, SMALL_INT, TIME = "bool", "smallInt", "time"

CHEAP, TABLE, RESOURCE = 0, 1, 1


class Inconsistent(Exception):
    """A domain was wiped out."""


_FAIL = Inconsistent()


class CpVar(NamedTuple):
    id: int
    kind: str
    name: str


class Propagator:
    """Base class for constraints.

    Subclasses register watches in :meth:`attach` and prune domains in
    :meth:`propagate`, raising :class:`Inconsistent` on failure. A propagator
    that reaches its own fixpoint in one call sets ``idempotent`` so that its
    own writes do not requeue it. ``wants(tag)`` may veto a wake-up for a
    given watch tag.
    """

    priority = CHEAP
    idempotent = False
    queued = False
    wants = None

    def attach(self, s: "Solver") -> None:
        raise NotImplementedError

    def propagate(self) -> None:
        raise NotImplementedError


class Solver:
    """The solver state: domains, trail, watch lists and the propagation queue."""

    def __init__(self):
        self.lo: list[int] = []
        self.hi: list[int] = []
        self.bits: list[int | None] = []
        self.kind: list[str] = []
        self.names: list[str] = []
        self.watchers: list[list[tuple[Propagator, int]]] = []
        self.propagators: list[Propagator] = []
        self._trail: list[tuple[int, int, int, int | None]] = []
        self._saved: list[int] = []
        self._rev: list[tuple[list, int, object]] = []
        self._marks: list[tuple[int, int, int]] = []
        self._stamp = 0
        self._next_stamp = 1
        self._queues = (deque(), deque())
        self._current: Propagator | None = None
        self.shuffle_rng: random.Random | None = None
        self.propagations = 0

    # variables ----------------------------------------------------------------
    def _new(self, lo: int, hi: int, bits: int | None, kind: str, name: str) -> int:
        v = len(self.lo)
        self.lo.append(lo)
        self.hi.append(hi)
        self.bits.append(bits)
        self.kind.append(kind)
        self.names.append(name or f"x{v}")
        self.watchers.append([])
        self._saved.append(-1)
        return v

    def new_time_var(self, lo: int, hi: int, name: str = "") -> int:
        if lo > hi:
            raise Inconsistent()
        return self._new(lo, hi, None, TIME, name)

    def new_value_var(self, values: Iterable[int], name: str = "", kind: str = SMALL_INT) -> int:
        mask = 0
        for a in values:
            if a < 0:
                raise ValueError("value variables take nonnegative values")
            mask |= 1 << a
        if not mask:
            raise Inconsistent()
        return self._new((mask & -mask).bit_length() - 1, mask.bit_length() - 1, mask, kind, name)

    def new_bool(self, name: str = "") -> int:
        return self._new(0, 1, 3, BOOL, name)

    def new_const(self, value: int, name: str = "") -> int:
        return self.new_value_var((value,), name or f"const{value}")

    def var(self, v: int) -> CpVar:
        return CpVar(v, self.kind[v], self.names[v])

    @property
    def num_vars(self) -> int:
        return len(self.lo)

    def is_fixed(self, v: int) -> bool:
        return self.lo[v] == self.hi[v]

    def value(self, v: int) -> int:
        if self.lo[v] != self.hi[v]:
            raise ValueError(f"{self.names[v]} is not assigned")
        return self.lo[v]

    def contains(self, v: int, a: int) -> bool:
        b = self.bits[v]
        if b is None:
            return self.lo[v] <= a <= self.hi[v]
        return a >= 0 and (b >> a) & 1 == 1

    def values(self, v: int) -> Iterator[int]:
        b = self.bits[v]
        if b is None:
            yield from range(self.lo[v], self.hi[v] + 1)
            return
        while b:
            low = b & -b
            yield low.bit_length() - 1
            b ^= low

    def size(self, v: int) -> int:
        b = self.bits[v]
        if b is None:
            return self.hi[v] - self.lo[v] + 1
        return bin(b).count("1")

    def domain(self, v: int) -> tuple[int, int, int | None]:
        return self.lo[v], self.hi[v], self.bits[v]

    # trail ----------------------------------------------------------------------
    @property
    def stamp(self) -> int:
        return self._stamp

    @property
    def depth(self) -> int:
        return len(self._marks)

    def push(self) -> int:
        self._marks.append((len(self._trail), len(self._rev), self._stamp))
        self._stamp = self._next_stamp
        self._next_stamp += 1
        return len(self._marks)

    def pop(self) -> None:
        n_trail, n_rev, stamp = self._marks.pop()
        trail, lo, hi, bits = self._trail, self.lo, self.hi, self.bits
        while len(trail) > n_trail:
            v, l, h, b = trail.pop()
            lo[v] = l
            hi[v] = h
            bits[v] = b
        rev = self._rev
        while len(rev) > n_rev:
            container, idx, old = rev.pop()
            container[idx] = old
        self._stamp = stamp

    def pop_to(self, depth: int) -> None:
        while len(self._marks) > depth:
            self.pop()

    def rev_set(self, container: list, idx: int, value) -> None:
        """Reversibly write ``container[idx] = value``."""
        self._rev.append((container, idx, container[idx]))
        container[idx] = value

    def _save(self, v: int) -> None:
        if self._saved[v] != self._stamp:
            self._saved[v] = self._stamp
            self._trail.append((v, self.lo[v], self.hi[v], self.bits[v]))

    # domain updates ---------------------------------------------------------------
    def set_min(self, v: int, m: int) -> bool:
        if m <= self.lo[v]:
            return False
        if m > self.hi[v]:
            raise _FAIL
        self._save(v)
        b = self.bits[v]
        if b is not None:
            b &= ~((1 << m) - 1)
            self.bits[v] = b
            m = (b & -b).bit_length() - 1
        self.lo[v] = m
        self._notify(v)
        return True

    def set_max(self, v: int, m: int) -> bool:
        if m >= self.hi[v]:
            return False
        if m < self.lo[v]:
            raise _FAIL
        self._save(v)
        b = self.bits[v]
        if b is not None:
            b &= (1 << (m + 1)) - 1
            self.bits[v] = b
            m = b.bit_length() - 1
        self.hi[v] = m
        self._notify(v)
        return True

    def assign(self, v: int, a: int) -> bool:
        lo, hi = self.lo[v], self.hi[v]
        if lo == hi:
            if lo != a:
                raise _FAIL
            return False
        if a < lo or a > hi:
            raise _FAIL
        b = self.bits[v]
        if b is not None:
            if not (b >> a) & 1:
                raise _FAIL
            self._save(v)
            self.bits[v] = 1 << a
        else:
            self._save(v)
        self.lo[v] = a
        self.hi[v] = a
        self._notify(v)
        return True

    def remove(self, v: int, a: int) -> bool:
        lo, hi = self.lo[v], self.hi[v]
        if a < lo or a > hi:
            return False
        b = self.bits[v]
        if b is None:
            if a == lo:
                return self.set_min(v, a + 1)
            if a == hi:
                return self.set_max(v, a - 1)
            return False
        if not (b >> a) & 1:
            return False
        b &= ~(1 << a)
        if not b:
            raise _FAIL
        self._save(v)
        self.bits[v] = b
        self.lo[v] = (b & -b).bit_length() - 1
        self.hi[v] = b.bit_length() - 1
        self._notify(v)
        return True

    def restrict(self, v: int, mask: int) -> bool:
        """Keep only the values whose bit is set in ``mask`` (value variables)."""
        b = self.bits[v]
        nb = b & mask
        if nb == b:
            return False
        if not nb:
            raise _FAIL
        self._save(v)
        self.bits[v] = nb
        self.lo[v] = (nb & -nb).bit_length() - 1
        self.hi[v] = nb.bit_length() - 1
        self._notify(v)
        return True

    # propagation ---------------------------------------------------------------------
    def watch(self, v: int, prop: Propagator, tag: int = 0) -> None:
        self.watchers[v].append((prop, tag))

    def post(self, prop: Propagator) -> Propagator:
        """Attach ``prop`` and schedule it; call :meth:`propagate` afterwards."""
        prop.attach(self)
        self.propagators.append(prop)
        self.schedule(prop)
        return prop

    def schedule(self, prop: Propagator) -> None:
        if not prop.queued:
            prop.queued = True
            self._queues[prop.priority].append(prop)

    def _notify(self, v: int) -> None:
        current = self._current
        for prop, tag in self.watchers[v]:
            if prop.queued or (prop is current and prop.idempotent):
                continue
            wants = prop.wants
            if wants is not None and not wants(tag):
                continue
            prop.queued = True
            self._queues[prop.priority].append(prop)

    def _next(self) -> Propagator | None:
        for q in self._queues:
            if q:
                rng = self.shuffle_rng
                if rng is not None and len(q) > 1:
                    i = rng.randrange(len(q))
                    q[i], q[-1] = q[-1], q[i]
                    return q.pop()
                return q.popleft()
        return None

    def propagate(self) -> bool:
        """Run queued propagators to fixpoint; False on a wipe-out."""
        try:
            while True:
                p = self._next()
                if p is None:
                    break
                p.queued = False
                self._current = p
                self.propagations += 1
                p.propagate()
            self._current = None
            return True
        except Inconsistent:
            self._current = None
            self.clear_queue()
            return False

    def clear_queue(self) -> None:
        for q in self._queues:
            for p in q:
                p.queued = False
            q.clear()

    def snapshot(self) -> list[int]:
        """Lower bounds of every variable (the values, once all are assigned)."""
        return list(self.lo)

    def checksum(self) -> int:
        return hash((tuple(self.lo), tuple(self.hi), tuple(self.bits)))
