"""Bounded coordinate decomposition in a GAP basis and the product-sum cover."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import mitm
from .core_arith import FieldElement, floor_scaled_power
from .errors import AmbiguousDecomposition, NotContained, OutOfRange, PreconditionError
from .gap import Gap, _naive_first


def _residue(z) -> int:
    return z.value if isinstance(z, FieldElement) else int(z)


def decompose(z, b: Gap, cap: int | None = None, method: str = "mitm",
              strict: bool = True) -> tuple[int, ...] | None:
    """A coefficient vector a in B's box with x_0 + sum a_k x_k = z, or None.

    With ``strict`` a second solution raises AmbiguousDecomposition (carrying both);
    otherwise the first solution in magnitude order is returned.
    """
    p = b.modulus
    target = (_residue(z) - b.base_point) % p
    if method == "naive":
        first = _naive_first(b.generators, b.ranges, p, target, cap)
        if first is None or not strict:
            return first
        sols = _naive_all(b, target, cap, limit=2)
    elif method == "mitm":
        s = mitm.solver(b.generators, b.ranges, p, cap)
        it = s.iter_solutions(target)
        sols = [v for v, _ in zip(it, range(2 if strict else 1))]
    else:
        raise ValueError(f"unknown method {method!r}")
    if not sols:
        return None
    if len(sols) > 1:
        raise AmbiguousDecomposition(sols)
    return sols[0]


def _naive_all(b: Gap, target: int, cap, limit: int):
    orders = [mitm.magnitude_order(lo, hi) for lo, hi in b.ranges]
    out = []
    p = b.modulus
    for vec in itertools.product(*orders):
        if sum(a * g for a, g in zip(vec, b.generators)) % p == target:
            out.append(vec)
            if len(out) >= limit:
                break
    return out


def decompose_many(zs: Sequence, b: Gap, cap: int | None = None):
    """Batch decomposition: returns (solution counts, first solutions)."""
    p = b.modulus
    targets = [(_residue(z) - b.base_point) % p for z in zs]
    s = mitm.solver(b.generators, b.ranges, p, cap)
    counts, firsts = s.solve_many(targets)
    return counts, firsts


@dataclass(frozen=True)
class DecompositionTable:
    """entries[i][j] = (a_ij^(1), ..., a_ij^(d)) with y_i y'_j = sum_k a_ij^(k) x_k."""

    entries: tuple[tuple[tuple[int, ...], ...], ...]
    ambiguous: tuple[tuple[int, int], ...] = field(default=())

    @property
    def bound_observed(self) -> int:
        return max((abs(v) for row in self.entries for e in row for v in e), default=0)

    def to_json(self):
        return [[[str(v) for v in e] for e in row] for row in self.entries]


def decompose_products(a: Gap, a2: Gap, b: Gap, cap: int | None = None) -> DecompositionTable:
    """Decompose every generator product y_i y'_j in B's basis."""
    p = b.modulus
    if not (a.modulus == a2.modulus == p):
        raise PreconditionError("A, A' and B must share the modulus")
    if not (a.rank == a2.rank == b.rank):
        raise PreconditionError("A, A' and B must have the same rank")
    if not any(a.generators) or not any(a2.generators):
        raise PreconditionError("A and A' need a nonzero generator")
    rows, ambiguous = [], []
    for i, y in enumerate(a.generators):
        row = []
        for j, y2 in enumerate(a2.generators):
            try:
                vec = decompose(y * y2 % p, b, cap)
            except AmbiguousDecomposition as exc:
                vec = exc.solutions[0]
                ambiguous.append((i, j))
            if vec is None:
                raise NotContained(i, j)
            row.append(vec)
        rows.append(tuple(row))
    return DecompositionTable(tuple(rows), tuple(ambiguous))


# --- cover witness -------------------------------------------------------------------


@dataclass(frozen=True)
class CoverWitness:
    """w = u v + u' v' with (u, v) and (u', v') in the product box."""

    lambda_factors: tuple[int, int]
    mu_factors: tuple[int, int]
    target: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.lambda_factors + self.mu_factors

    def verify(self, c, c_prime, n: int, eps) -> bool:
        u_max = floor_scaled_power(c, n, 1 - Fraction(eps))
        v_max = floor_scaled_power(c_prime, n, eps)
        (u, v), (u2, v2) = self.lambda_factors, self.mu_factors
        return (u * v + u2 * v2 == self.target and abs(u) <= u_max and abs(u2) <= u_max
                and abs(v) <= v_max and abs(v2) <= v_max)


def check_epsilon(eps) -> Fraction:
    eps = Fraction(eps)
    if not (0 < eps < 1):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if eps.denominator > 8:
        raise ValueError("epsilon must be a rational with denominator at most 8")
    return eps


def cover_witness(w: int, c, c_prime, n: int, eps) -> CoverWitness:
    """Write w = a b + r 1 with b = floor(c' N^eps), following the base-b expansion."""
    c, c_prime, eps = Fraction(c), Fraction(c_prime), check_epsilon(eps)
    if abs(w) > c * c_prime / 2 * n:
        raise OutOfRange(f"|w| = {abs(w)} exceeds c''N = {c * c_prime / 2 * n}")
    if w == 0:
        return CoverWitness((0, 0), (0, 0), 0)
    u_max = floor_scaled_power(c, n, 1 - eps)
    base = floor_scaled_power(c_prime, n, eps)
    if base < 1 or u_max < 1:
        raise OutOfRange(f"product box is empty at N = {n}")
    q, r = divmod(abs(w), base)
    if q > u_max:
        raise OutOfRange(f"quotient {q} exceeds cN^(1-eps) = {u_max} at N = {n}")
    sign = 1 if w > 0 else -1
    mu = (sign * r, 1) if r <= u_max else (sign, r)
    return CoverWitness((sign * q, base), mu, w)
