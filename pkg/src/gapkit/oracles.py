"""Independent ground truth: bounded minimal polynomials and multiplicative energy."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import mitm
from .core_arith import FieldElement, IntPolynomial
from .errors import CapExceeded

MINPOLY_CAP = 10**9


def order_key(f: IntPolynomial):
    return (f.degree, f.height, f.coefficients)


@dataclass(frozen=True)
class MinPolyResult:
    polynomials: tuple[IntPolynomial, ...]

    @property
    def minimal(self) -> IntPolynomial | None:
        return self.polynomials[0] if self.polynomials else None

    def __contains__(self, f: IntPolynomial) -> bool:
        return f.primitive() in self.polynomials

    def to_json(self):
        return [[str(c) for c in f.coefficients] for f in self.polynomials]


def minpoly_bounded(t: FieldElement, d: int, h: int, cap: int | None = None) -> MinPolyResult:
    """All content-free f with deg f <= d, H(f) <= h, f(t) = 0 mod p, leading coefficient > 0.

    Sorted by (degree, height, coefficients from the constant term); the first is minimal.
    """
    if d < 1 or h < 1:
        raise ValueError("need d >= 1 and h >= 1")
    cap = MINPOLY_CAP if cap is None else cap
    size = (2 * h + 1) ** (d + 1)
    if size > cap:
        raise CapExceeded(size, cap, "coefficient box")
    p = t.modulus
    powers = [pow(t.value, k, p) for k in range(d + 1)]
    s = mitm.LinearSolver(powers, [(-h, h)] * (d + 1), p, cap)
    found = []
    for vec in s.iter_solutions(0, nonzero=True):
        lead = next(c for c in reversed(vec) if c)
        if lead < 0 or math.gcd(*vec) != 1:
            continue
        found.append(IntPolynomial(vec))
    return MinPolyResult(tuple(sorted(found, key=order_key)))


def mult_energy(s: Iterable, p: int | None = None, cap: int | None = None) -> int:
    """#{(a1, a2, a3, a4) in S^4 : a1 a2 = a3 a4 mod p} as the sum of squared product counts."""
    elems = list(s)
    if elems and isinstance(elems[0], FieldElement):
        p = elems[0].modulus
        elems = [e.value for e in elems]
    if p is None:
        raise ValueError("modulus required for plain integer sets")
    vals = sorted({int(v) % p for v in elems})
    cap = mitm.resolve_cap(cap)
    if len(vals) ** 2 > cap:
        raise CapExceeded(len(vals) ** 2, cap, "pair set")
    if p < 2**31:
        arr = np.array(vals, dtype=np.int64)
        prods = np.mod(np.multiply.outer(arr, arr), p).ravel()
        _, counts = np.unique(prods, return_counts=True)
        return int(np.sum(counts.astype(np.int64) ** 2))
    counts = Counter(x * y % p for x in vals for y in vals)
    return sum(m * m for m in counts.values())
