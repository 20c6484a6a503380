"""Generalized arithmetic progressions in F_p and their predicates.

A ``Gap`` is ``base_point + {sum a_i x_i}`` where the coefficient box is either
symmetric (|a_i| <= N_i) or one-sided (0 <= a_i <= N_i - 1). Isolation uses
|a_i| <= kappa N_i in both cases.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from . import mitm
from .core_arith import FieldElement, check_modulus
from .errors import CapExceeded


@dataclass(frozen=True)
class Gap:
    modulus: int
    generators: tuple[int, ...]
    bounds: tuple[int, ...]
    base_point: int = 0
    one_sided: bool = False

    def __post_init__(self):
        p = check_modulus(self.modulus)
        gens = tuple(int(g) % p for g in self.generators)
        bounds = tuple(int(n) for n in self.bounds)
        if not gens:
            raise ValueError("a GAP needs at least one generator")
        if len(bounds) != len(gens):
            raise ValueError("one bound per generator")
        if any(n < 1 for n in bounds):
            raise ValueError("bounds must be positive")
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "base_point", int(self.base_point) % p)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def ranges(self) -> tuple[tuple[int, int], ...]:
        if self.one_sided:
            return tuple((0, n - 1) for n in self.bounds)
        return tuple((-n, n) for n in self.bounds)

    @property
    def box_size(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in self.ranges)

    def evaluate(self, coeffs: Sequence[int]) -> int:
        p = self.modulus
        return (self.base_point + sum(a * x for a, x in zip(coeffs, self.generators))) % p

    def element(self, coeffs: Sequence[int]) -> FieldElement:
        return FieldElement(self.evaluate(coeffs), self.modulus)

    def in_box(self, coeffs: Sequence[int]) -> bool:
        return all(lo <= a <= hi for a, (lo, hi) in zip(coeffs, self.ranges))

    def elements(self, cap: int | None = None) -> set[int]:
        return {z for _, z in enumerate_gap(self, cap)}

    def to_json(self) -> dict[str, Any]:
        out = {
            "p": str(self.modulus),
            "generators": [str(g) for g in self.generators],
            "bounds": list(self.bounds),
            "base_point": str(self.base_point),
        }
        if self.one_sided:
            out["one_sided"] = True
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Gap:
        return cls(int(data["p"]), tuple(int(g) for g in data["generators"]),
                   tuple(int(n) for n in data["bounds"]), int(data.get("base_point", "0")),
                   bool(data.get("one_sided", False)))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a predicate: ``holds`` plus a witness when it does not."""

    holds: bool
    witness: Any = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class IsolationWitness:
    coefficients: tuple[int, ...]

    def evaluate(self, generators: Sequence[int], p: int) -> int:
        return sum(a * x for a, x in zip(self.coefficients, generators)) % p

    def to_dict(self):
        return {"coefficients": [str(a) for a in self.coefficients]}


@dataclass(frozen=True)
class ProductViolation:
    left: int
    right: int
    left_coeffs: tuple[int, ...] = field(default=())
    right_coeffs: tuple[int, ...] = field(default=())

    @property
    def product(self) -> int:
        return self.left * self.right

    def to_dict(self):
        return {"a": str(self.left), "a_prime": str(self.right),
                "a_coeffs": [str(v) for v in self.left_coeffs],
                "a_prime_coeffs": [str(v) for v in self.right_coeffs]}


def enumerate_gap(b: Gap, cap: int | None = None) -> Iterator[tuple[tuple[int, ...], int]]:
    """Every (coefficient vector, residue) of the box in lexicographic order."""
    cap = mitm.resolve_cap(cap)
    if b.box_size > cap:
        raise CapExceeded(b.box_size, cap)
    p = b.modulus
    for coeffs in itertools.product(*(range(lo, hi + 1) for lo, hi in b.ranges)):
        yield coeffs, (b.base_point + sum(a * x for a, x in zip(coeffs, b.generators))) % p


def difference_ranges(b: Gap) -> tuple[tuple[int, int], ...]:
    return tuple((lo - hi, hi - lo) for lo, hi in b.ranges)


def _split_difference(delta, b: Gap):
    u, v = [], []
    for dl in delta:
        if b.one_sided:
            u.append(max(dl, 0))
            v.append(max(-dl, 0))
        else:
            ui = -((-dl) // 2)
            u.append(ui)
            v.append(ui - dl)
    u, v = tuple(u), tuple(v)
    return (u, v) if u > v else (v, u)


def is_proper(b: Gap, cap: int | None = None) -> Verdict:
    """All box vectors evaluate to distinct elements.

    Searches the difference box for a nonzero annihilating vector; on failure the
    witness is a pair of distinct coefficient vectors with the same value.
    """
    s = mitm.solver(b.generators, difference_ranges(b), b.modulus, cap)
    delta = s.first(0, nonzero=True)
    if delta is None:
        return Verdict(True)
    return Verdict(False, _split_difference(delta, b))


def is_proper_naive(b: Gap, cap: int | None = None) -> Verdict:
    seen: dict[int, tuple[int, ...]] = {}
    for coeffs, z in enumerate_gap(b, cap):
        if z in seen:
            u, v = seen[z], coeffs
            return Verdict(False, (u, v) if u > v else (v, u))
        seen[z] = coeffs
    return Verdict(True)


def isolation_ranges(b: Gap, kappa) -> tuple[tuple[int, int], ...]:
    kappa = Fraction(kappa)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return tuple((-(m := math.floor(kappa * n)), m) for n in b.bounds)


def is_isolated(b: Gap, kappa, cap: int | None = None, method: str = "mitm") -> Verdict:
    """No nonzero integer vector with |a_i| <= kappa N_i annihilates the generators."""
    ranges = isolation_ranges(b, kappa)
    if method == "mitm":
        s = mitm.solver(b.generators, ranges, b.modulus, cap)
        vec = s.first(0, nonzero=True)
    elif method == "naive":
        vec = _naive_first(b.generators, ranges, b.modulus, 0, cap, nonzero=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Verdict(True) if vec is None else Verdict(False, IsolationWitness(vec))


def _naive_first(gens, ranges, p, target, cap, nonzero=False):
    cap = mitm.resolve_cap(cap)
    size = math.prod(hi - lo + 1 for lo, hi in ranges)
    if size > cap:
        raise CapExceeded(size, cap)
    orders = [mitm.magnitude_order(lo, hi) for lo, hi in ranges]
    for vec in itertools.product(*orders):
        if nonzero and not any(vec):
            continue
        if sum(a * g for a, g in zip(vec, gens)) % p == target % p:
            return vec
    return None


def sumset_scale(b: Gap, n: int) -> Gap:
    """The n-fold sumset nB as a GAP."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if b.one_sided:
        return replace(b, bounds=tuple(n * (m - 1) + 1 for m in b.bounds),
                       base_point=n * b.base_point)
    return replace(b, bounds=tuple(n * m for m in b.bounds))


def difference_gap(b: Gap) -> Gap:
    """B - B as a symmetric GAP with base point zero."""
    bounds = tuple(hi - lo for lo, hi in b.ranges)
    if any(m < 1 for m in bounds):
        raise ValueError("B - B is the singleton {0}; every N_i must be at least 2")
    return Gap(b.modulus, b.generators, bounds)


# --- product containment -------------------------------------------------------------


def box_vectors(ranges) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in ranges],
                        indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def augmented(b: Gap) -> tuple[list[int], np.ndarray, list[int]]:
    """Generators with the base point prepended, and coefficient rows (1, a_1, ..., a_d).

    Coordinates whose range is {0} contribute nothing and are dropped.
    """
    live = [k for k, r in enumerate(b.ranges) if r != (0, 0)]
    vecs = box_vectors([b.ranges[k] for k in live]) if live else np.zeros((1, 0), np.int64)
    gens = [b.base_point] + [b.generators[k] for k in live]
    ones = np.ones((len(vecs), 1), dtype=np.int64)
    return gens, np.hstack([ones, vecs]), live


def bilinear_scan(coeffs_a, coeffs_b, table, lo, hi, is_member, chunk=2048):
    """First (row_a, row_b) whose product is not in B, or None.

    ``table[u][w]`` is an integer representation of gen_a[u] * gen_b[w] in B's
    generator basis. Candidates inside [lo, hi] are members outright; the rest are
    settled by ``is_member(rows_a, rows_b)`` which returns a boolean array.
    """
    tab = np.asarray(table, dtype=object)
    span = (np.abs(coeffs_a).max(initial=0) * np.abs(coeffs_b).max(initial=0)
            * max(int(np.abs(tab).max(initial=0)), 1) * coeffs_a.shape[1] * coeffs_b.shape[1])
    dtype = np.int64 if span < 2**62 else object
    tab = tab.astype(dtype)
    ca, cb = coeffs_a.astype(dtype), coeffs_b.astype(dtype)
    lo, hi = np.asarray(lo), np.asarray(hi)
    for start in range(0, len(ca), chunk):
        block = ca[start:start + chunk]
        cand = np.einsum("au,bw,uwk->abk", block, cb, tab)
        inside = np.all((cand >= lo) & (cand <= hi), axis=2)
        ia, ib = np.nonzero(~inside)
        if len(ia) == 0:
            continue
        member = is_member(ia + start, ib)
        bad = np.nonzero(~member)[0]
        if len(bad):
            return int(ia[bad[0]] + start), int(ib[bad[0]])
    return None


def product_table(gens_a, gens_b, b: Gap, cap=None):
    """Representations of all gen_a[u] * gen_b[w] over B's generators, or None."""
    p = b.modulus
    hull = tuple((-max(abs(lo), abs(hi)), max(abs(lo), abs(hi))) for lo, hi in b.ranges)
    s = mitm.solver(b.generators, hull, p, cap)
    table = []
    for ga in gens_a:
        row = []
        for gb in gens_b:
            vec = s.first(ga * gb % p)
            if vec is None:
                return None
            row.append(vec)
        table.append(row)
    return table


def contains_product(a: Gap, a2: Gap, b: Gap, cap: int | None = None) -> Verdict:
    """Every product of an element of A with an element of A' lies in B."""
    p = b.modulus
    if not (a.modulus == a2.modulus == p):
        raise ValueError("A, A' and B must share the modulus")
    cap = mitm.resolve_cap(cap)
    size = a.box_size * a2.box_size
    if size > cap:
        raise CapExceeded(size, cap, "product set")
    gens_a, ca, live_a = augmented(a)
    gens_b, cb, live_b = augmented(a2)
    member_solver = mitm.solver(b.generators, b.ranges, p, cap)

    def values(gens, rows):
        out = np.empty(len(rows), dtype=object)
        out[:] = [sum(int(c) * g for c, g in zip(row, gens)) % p for row in rows.tolist()]
        return out

    va, vb = values(gens_a, ca), values(gens_b, cb)

    def is_member(ia, ib):
        targets = (va[ia] * vb[ib] - b.base_point) % p
        return member_solver.contains_many(targets.astype(np.int64))

    table = product_table(gens_a, gens_b, b, cap) if b.base_point == 0 else None
    if table is None:
        # No bilinear shortcut: every product goes through the membership search.
        lo = np.zeros(b.rank, dtype=np.int64)
        hi = np.full(b.rank, -1, dtype=np.int64)
        table = [[(0,) * b.rank] * len(gens_b)] * len(gens_a)
    else:
        lo = np.array([r[0] for r in b.ranges], dtype=np.int64)
        hi = np.array([r[1] for r in b.ranges], dtype=np.int64)
    bad = bilinear_scan(ca, cb, table, lo, hi, is_member)
    if bad is None:
        return Verdict(True)
    ia, ib = bad
    left, right = int(va[ia]), int(vb[ib])
    return Verdict(False, ProductViolation(left, right, _full(ca[ia][1:], live_a, a.rank),
                                           _full(cb[ib][1:], live_b, a2.rank)))


def _full(row, live, rank) -> tuple[int, ...]:
    out = [0] * rank
    for k, v in zip(live, row):
        out[k] = int(v)
    return tuple(out)
