"""Extensional (table) constraints enforcing generalized arc consistency.

Two algorithms share one contract. :class:`CompactTable` keeps the valid
tuples in a reversible sparse bitset of 64-bit words, with a residue word per
(column, value). :class:`SmallTable` handles relations of at most 64 tuples,
where the whole valid set and every support set fit in a single word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

from sutp.cp.kernel import TABLE, Inconsistent, Propagator, Solver

WORD = 64
WORD_MASK = (1 << WORD) - 1
SMALL_TABLE_MAX = 64


@dataclass
class TableRelation:
    """Rows of allowed value combinations; ``columns`` optionally labels each position."""

    arity: int
    tuples: list[tuple[int, ...]]
    columns: list[Hashable] = field(default_factory=list)

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be at least 1")
        seen = set()
        rows = []
        for t in self.tuples:
            t = tuple(t)
            if len(t) != self.arity:
                raise ValueError(f"tuple {t} does not have arity {self.arity}")
            if t not in seen:
                seen.add(t)
                rows.append(t)
        self.tuples = rows
        if self.columns and len(self.columns) != self.arity:
            raise ValueError("one label per column")

    def __len__(self):
        return len(self.tuples)


def _valid_rows(s: Solver, xs: Sequence[int], relation: TableRelation) -> list[tuple[int, ...]]:
    if len(xs) != relation.arity:
        raise ValueError("variable count differs from the relation arity")
    for x in xs:
        if s.bits[x] is None:
            raise ValueError(f"table column {s.names[x]} must be a value variable")
    return [t for t in relation.tuples if all(s.contains(x, a) for x, a in zip(xs, t))]


class _TableBase(Propagator):
    priority = TABLE
    idempotent = True

    def __init__(self, xs: Sequence[int], relation: TableRelation):
        self.xs = list(xs)
        self.relation = relation

    def attach(self, s: Solver):
        self.s = s
        rows = _valid_rows(s, self.xs, self.relation)
        if not rows:
            raise Inconsistent()
        self.rows = rows
        self._build(rows)
        # domain bits at the end of the previous call, kept on the trail
        self.last = [0] * len(self.xs)
        for i, x in enumerate(self.xs):
            s.watch(x, self, i)

    def _build(self, rows):
        raise NotImplementedError

    def _changed(self) -> list[int]:
        bits, last = self.s.bits, self.last
        return [i for i, x in enumerate(self.xs) if bits[x] != last[i]]

    def _sync_last(self):
        s, bits, last = self.s, self.s.bits, self.last
        for i, x in enumerate(self.xs):
            if bits[x] != last[i]:
                s.rev_set(last, i, bits[x])


class CompactTable(_TableBase):
    """Compact-table filtering over a reversible sparse bitset."""

    def _build(self, rows):
        n = len(rows)
        self.n_words = (n + WORD - 1) // WORD
        supports: list[dict[int, list[int]]] = [dict() for _ in self.xs]
        for k, row in enumerate(rows):
            w, b = divmod(k, WORD)
            for i, a in enumerate(row):
                words = supports[i].get(a)
                if words is None:
                    words = supports[i][a] = [0] * self.n_words
                words[w] |= 1 << b
        self.supports = supports
        words = [WORD_MASK] * self.n_words
        tail = n % WORD
        if tail:
            words[-1] = (1 << tail) - 1
        self.words = words
        self.word_stamp = [-1] * self.n_words
        self.index = list(range(self.n_words))
        self.limit = [self.n_words - 1]
        self.residues = [{a: 0 for a in sup} for sup in supports]
        self.mask = [0] * self.n_words

    # reversible sparse bitset --------------------------------------------------
    def _clear_mask(self):
        mask, index = self.mask, self.index
        for i in range(self.limit[0] + 1):
            mask[index[i]] = 0

    def _add_to_mask(self, sup):
        mask, index = self.mask, self.index
        for i in range(self.limit[0] + 1):
            off = index[i]
            mask[off] |= sup[off]

    def _reverse_mask(self):
        mask, index = self.mask, self.index
        for i in range(self.limit[0] + 1):
            off = index[i]
            mask[off] = ~mask[off] & WORD_MASK

    def _intersect_with_mask(self):
        s = self.s
        words, mask, index, stamps = self.words, self.mask, self.index, self.word_stamp
        limit = self.limit[0]
        stamp = s.stamp
        for i in range(limit, -1, -1):
            off = index[i]
            w = words[off] & mask[off]
            if w != words[off]:
                if stamps[off] != stamp:
                    s.rev_set(stamps, off, stamp)
                    s.rev_set(words, off, w)
                else:
                    words[off] = w
                if w == 0:
                    index[i] = index[limit]
                    index[limit] = off
                    limit -= 1
        if limit != self.limit[0]:
            s.rev_set(self.limit, 0, limit)

    def _intersect_index(self, sup) -> int:
        words, index = self.words, self.index
        for i in range(self.limit[0] + 1):
            off = index[i]
            if words[off] & sup[off]:
                return off
        return -1

    # filtering ---------------------------------------------------------------------
    def propagate(self):
        s = self.s
        bits, xs, last, supports = s.bits, self.xs, self.last, self.supports
        changed = self._changed()
        for i in changed:
            cur = bits[xs[i]]
            removed = last[i] & ~cur if last[i] else 0
            sup = supports[i]
            self._clear_mask()
            if removed and _popcount(removed) < _popcount(cur):
                for a in _iter_bits(removed):
                    words = sup.get(a)
                    if words is not None:
                        self._add_to_mask(words)
                self._reverse_mask()
            else:
                for a in _iter_bits(cur):
                    words = sup.get(a)
                    if words is not None:
                        self._add_to_mask(words)
            self._intersect_with_mask()
            if self.limit[0] < 0:
                raise Inconsistent()
        only = changed[0] if len(changed) == 1 else -1
        words = self.words
        for i, x in enumerate(xs):
            if i == only and last[i]:
                continue
            b = bits[x]
            if b & (b - 1) == 0 and last[i] == b:
                continue
            sup, res = supports[i], self.residues[i]
            for a in _iter_bits(b):
                words_a = sup.get(a)
                if words_a is None:
                    s.remove(x, a)
                    continue
                r = res[a]
                if words[r] & words_a[r]:
                    continue
                off = self._intersect_index(words_a)
                if off < 0:
                    s.remove(x, a)
                else:
                    res[a] = off
        self._sync_last()


class SmallTable(_TableBase):
    """Table filtering for relations of at most 64 tuples, one word per support set."""

    def __init__(self, xs, relation):
        if len(relation.tuples) > SMALL_TABLE_MAX:
            raise ValueError(f"small table takes at most {SMALL_TABLE_MAX} tuples, "
                             f"got {len(relation.tuples)}")
        super().__init__(xs, relation)

    def _build(self, rows):
        supports: list[dict[int, int]] = [dict() for _ in self.xs]
        for k, row in enumerate(rows):
            for i, a in enumerate(row):
                supports[i][a] = supports[i].get(a, 0) | (1 << k)
        self.supports = supports
        self.current = [(1 << len(rows)) - 1]

    def propagate(self):
        s = self.s
        bits, xs, last, supports = s.bits, self.xs, self.last, self.supports
        changed = self._changed()
        cur_table = self.current[0]
        for i in changed:
            cur = bits[xs[i]]
            sup = supports[i]
            mask = 0
            for a in _iter_bits(cur):
                mask |= sup.get(a, 0)
            cur_table &= mask
        if not cur_table:
            raise Inconsistent()
        if cur_table != self.current[0]:
            s.rev_set(self.current, 0, cur_table)
        only = changed[0] if len(changed) == 1 else -1
        for i, x in enumerate(xs):
            if i == only and last[i]:
                continue
            b = bits[x]
            if b & (b - 1) == 0 and last[i] == b:
                continue
            sup = supports[i]
            keep = 0
            for a in _iter_bits(b):
                if sup.get(a, 0) & cur_table:
                    keep |= 1 << a
            if keep != b:
                s.restrict(x, keep)
        self._sync_last()


def _iter_bits(b: int):
    while b:
        low = b & -b
        yield low.bit_length() - 1
        b ^= low


def _popcount(b: int) -> int:
    return bin(b).count("1")


def post_table_compact(s: Solver, xs: Sequence[int], relation: TableRelation) -> Propagator:
    return s.post(CompactTable(xs, relation))


def post_table_small(s: Solver, xs: Sequence[int], relation: TableRelation) -> Propagator:
    return s.post(SmallTable(xs, relation))


def post_table(s: Solver, xs: Sequence[int], relation: TableRelation,
               algorithm: str = "auto") -> Propagator:
    """Post a table with ``algorithm`` in {"auto", "compact", "small"}."""
    if algorithm == "compact" or (algorithm == "auto" and len(relation) > SMALL_TABLE_MAX):
        return post_table_compact(s, xs, relation)
    if algorithm in ("small", "auto"):
        return post_table_small(s, xs, relation)
    raise ValueError(f"unknown table algorithm {algorithm!r}")
