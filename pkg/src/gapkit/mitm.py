"""Meet-in-the-middle search for bounded linear relations mod p.

Solves sum_i a_i g_i = target (mod p) over a coefficient box
lo_i <= a_i <= hi_i. The first ceil(d/2) coordinates are tabulated into a
residue-sorted array; the remaining coordinates are swept and matched with
``searchsorted``. Each coordinate is visited in magnitude order
(0, 1, -1, 2, -2, ...) so the first solution reported is a small one.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import CapExceeded

DEFAULT_CAP = 10**8
FULL_TABLE_LIMIT = 1 << 24


def resolve_cap(cap: int | None = None) -> int:
    if cap is not None:
        return int(cap)
    env = os.environ.get("GAPKIT_CAP")
    return int(env) if env else DEFAULT_CAP


def magnitude_order(lo: int, hi: int) -> list[int]:
    return sorted(range(lo, hi + 1), key=lambda a: (abs(a), a < 0))


def _residues(gens: Sequence[int], orders: Sequence[list[int]], p: int) -> np.ndarray:
    res = np.zeros(1, dtype=np.int64)
    for g, order in zip(gens, orders):
        vals = np.array([a * g % p for a in order], dtype=np.int64)
        res = ((res[:, None] + vals[None, :]) % p).ravel()
    return res


class LinearSolver:
    """Reusable index for one (generators, box, modulus) triple."""

    def __init__(self, generators: Sequence[int], ranges: Sequence[tuple[int, int]], p: int,
                 cap: int | None = None):
        self.p = p
        self.generators = tuple(int(g) % p for g in generators)
        self.ranges = tuple((int(lo), int(hi)) for lo, hi in ranges)
        d = len(self.generators)
        if d != len(self.ranges) or d == 0:
            raise ValueError("need one range per generator")
        split = (d + 1) // 2
        orders = [magnitude_order(lo, hi) for lo, hi in self.ranges]
        if any(not o for o in orders):
            raise ValueError("empty coefficient range")
        self._left_orders, self._right_orders = orders[:split], orders[split:]
        left_size = math.prod(len(o) for o in self._left_orders)
        right_size = math.prod(len(o) for o in self._right_orders)
        cap = resolve_cap(cap)
        if left_size + right_size > cap:
            raise CapExceeded(left_size + right_size, cap, "meet-in-the-middle table")
        left = _residues(self.generators[:split], self._left_orders, p)
        self._perm = np.argsort(left, kind="stable")
        self._sorted = left[self._perm]
        self._right = _residues(self.generators[split:], self._right_orders, p)
        self._full = None

    @property
    def work(self) -> int:
        return len(self._sorted) + len(self._right)

    def _decode(self, index: int, orders) -> tuple[int, ...]:
        out = []
        for order in reversed(orders):
            index, r = divmod(index, len(order))
            out.append(order[r])
        return tuple(reversed(out))

    def vector(self, left_index: int, right_index: int) -> tuple[int, ...]:
        return self._decode(int(left_index), self._left_orders) + \
            self._decode(int(right_index), self._right_orders)

    def iter_solutions(self, target: int, nonzero: bool = False) -> Iterator[tuple[int, ...]]:
        """All box vectors hitting ``target``, right half in magnitude order."""
        need = np.mod(target % self.p - self._right, self.p)
        lo = np.searchsorted(self._sorted, need, side="left")
        hi = np.searchsorted(self._sorted, need, side="right")
        for r in np.nonzero(hi > lo)[0]:
            for pos in range(lo[r], hi[r]):
                vec = self.vector(self._perm[pos], r)
                if nonzero and not any(vec):
                    continue
                yield vec

    def first(self, target: int, nonzero: bool = False) -> tuple[int, ...] | None:
        return next(self.iter_solutions(target, nonzero), None)

    def contains_many(self, targets) -> np.ndarray:
        """Boolean membership of each target in the box image."""
        targets = np.mod(np.asarray(targets, dtype=np.int64), self.p)
        if len(self._sorted) * len(self._right) <= FULL_TABLE_LIMIT:
            if self._full is None:
                full = (self._sorted[:, None] + self._right[None, :]) % self.p
                self._full = np.unique(full)
            pos = np.searchsorted(self._full, targets)
            pos = np.minimum(pos, len(self._full) - 1)
            return self._full[pos] == targets
        counts, _ = self.solve_many(targets, with_firsts=False)
        return counts > 0

    def solve_many(self, targets, with_firsts: bool = True) -> tuple[np.ndarray, list]:
        """Count solutions per target and return the first one found for each.

        Returns ``(counts, firsts)``; ``firsts[i]`` is None when counts[i] == 0.
        """
        targets = np.mod(np.asarray(targets, dtype=np.int64), self.p)
        m = len(targets)
        counts = np.zeros(m, dtype=np.int64)
        first_left = np.full(m, -1, dtype=np.int64)
        first_right = np.full(m, -1, dtype=np.int64)
        for r, rv in enumerate(self._right):
            need = np.mod(targets - rv, self.p)
            lo = np.searchsorted(self._sorted, need, side="left")
            hi = np.searchsorted(self._sorted, need, side="right")
            hit = hi > lo
            if not hit.any():
                continue
            fresh = hit & (first_left < 0)
            first_left[fresh] = self._perm[lo[fresh]]
            first_right[fresh] = r
            counts += hi - lo
        if not with_firsts:
            return counts, []
        firsts = [None if first_left[i] < 0 else self.vector(first_left[i], first_right[i])
                  for i in range(m)]
        return counts, firsts


@lru_cache(maxsize=16)
def cached_solver(generators: tuple[int, ...], ranges: tuple[tuple[int, int], ...], p: int,
                  cap: int) -> LinearSolver:
    return LinearSolver(generators, ranges, p, cap)


def solver(generators, ranges, p, cap=None) -> LinearSolver:
    return cached_solver(tuple(int(g) % p for g in generators),
                         tuple((int(lo), int(hi)) for lo, hi in ranges), p, resolve_cap(cap))
