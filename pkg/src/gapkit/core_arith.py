"""Exact arithmetic over F_p and over Z.

Residues are plain Python ints internally; ``FieldElement`` wraps a residue with
its modulus at API boundaries. Python integers never overflow, so products of
two residues below 2^61 are exact before reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

from .errors import CompositeModulus, ZeroInverse

MODULUS_LIMIT = 1 << 61
EXHAUSTIVE_SQRT_LIMIT = 1 << 20

# Deterministic Miller-Rabin witnesses; correct for all n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_modulus(p: int) -> int:
    p = int(p)
    if not (2 <= p < MODULUS_LIMIT) or not is_prime(p):
        raise CompositeModulus(p)
    return p


def lift(v: int, p: int) -> int:
    """Height-minimal integer representative of ``v`` mod ``p``."""
    v %= p
    return v - p if v > p // 2 else v


@dataclass(frozen=True)
class FieldElement:
    value: int
    modulus: int

    def __post_init__(self):
        p = check_modulus(self.modulus)
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "value", int(self.value) % p)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise ValueError("field elements have different moduli")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        return NotImplemented

    def _new(self, v: int) -> FieldElement:
        return FieldElement(v, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * inv_mod(self._new(o))

    def __pow__(self, e: int):
        if e < 0:
            return inv_mod(self) ** (-e)
        return self._new(pow(self.value, e, self.modulus))

    def __int__(self):
        return self.value

    def lift(self) -> int:
        return lift(self.value, self.modulus)

    def __repr__(self):
        return f"FieldElement({self.value}, {self.modulus})"


def height(x: FieldElement) -> int:
    """Integer height |x| = min{|a| : a = x mod p}."""
    return abs(lift(x.value, x.modulus))


def inv_mod(x: FieldElement) -> FieldElement:
    if x.value == 0:
        raise ZeroInverse(x.modulus)
    return FieldElement(pow(x.value, -1, x.modulus), x.modulus)


def _tonelli_shanks(a: int, p: int) -> int:
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sqrt_residue(a: int, p: int) -> int | None:
    """Smallest r in [0, p) with r^2 = a mod p, or None for a non-residue."""
    a %= p
    if a == 0 or p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p < EXHAUSTIVE_SQRT_LIMIT:
        for r in range(1, p // 2 + 1):
            if r * r % p == a:
                return r
    r = _tonelli_shanks(a, p)
    return min(r, p - r)


def sqrt_mod(a: FieldElement) -> tuple[FieldElement, ...] | None:
    """Square roots of ``a`` ordered smaller residue first; None for a non-residue."""
    p = a.modulus
    r = sqrt_residue(a.value, p)
    if r is None:
        return None
    roots = sorted({r, (p - r) % p})
    return tuple(FieldElement(v, p) for v in roots)


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def floor_scaled_power(c, n: int, eps) -> int:
    """Exact floor(c * n**eps) for rational c >= 0 and rational 0 <= eps <= 1."""
    c, eps = Fraction(c), Fraction(eps)
    if c < 0 or not (0 <= eps <= 1) or n < 0:
        raise ValueError("floor_scaled_power needs c >= 0, n >= 0, 0 <= eps <= 1")
    u, v = eps.numerator, eps.denominator
    a, b = c.numerator, c.denominator
    return iroot(a ** v * n ** u, v) // b


# --- integer polynomials -------------------------------------------------------------


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial; ``coefficients[k]`` multiplies x^k. Trailing zeros are trimmed."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = [int(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def height(self) -> int:
        return max((abs(c) for c in self.coefficients), default=0)

    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def leading(self) -> int:
        return self.coefficients[-1] if self.coefficients else 0

    def content(self) -> int:
        return math.gcd(*self.coefficients) if self.coefficients else 0

    def primitive(self) -> IntPolynomial:
        """Divide by the content and make the leading coefficient positive."""
        if self.is_zero():
            return self
        g = self.content()
        if self.leading < 0:
            g = -g
        return IntPolynomial(tuple(c // g for c in self.coefficients))

    def scale_argument(self, a: int) -> IntPolynomial:
        """The polynomial x -> f(a x)."""
        return IntPolynomial(tuple(c * a ** k for k, c in enumerate(self.coefficients)))

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __str__(self):
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coefficients[k]
            if c == 0:
                continue
            mag = abs(c)
            body = "" if (mag == 1 and k > 0) else str(mag)
            if k >= 1:
                body += "x" if k == 1 else f"x^{k}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return " ".join([head] + [f"{s} {b}" for s, b in terms[1:]])


def eval_poly_mod(f: IntPolynomial, t: FieldElement) -> FieldElement:
    """Horner evaluation of f at t, reduced mod p."""
    p = t.modulus
    acc = 0
    for c in reversed(f.coefficients):
        acc = (acc * t.value + c) % p
    return FieldElement(acc, p)


def poly_rem_mod(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    """Remainder of f by g in F_p[x]; coefficients ascending, result trimmed."""
    g = [c % p for c in g]
    while g and g[-1] == 0:
        g.pop()
    if not g:
        raise ZeroDivisionError("division by the zero polynomial mod p")
    r = [c % p for c in f]
    lead_inv = pow(g[-1], -1, p)
    dg = len(g) - 1
    while True:
        while r and r[-1] == 0:
            r.pop()
        if len(r) - 1 < dg:
            return r
        q = r[-1] * lead_inv % p
        shift = len(r) - 1 - dg
        for k, gc in enumerate(g):
            r[shift + k] = (r[shift + k] - q * gc) % p


def divides_mod(g: IntPolynomial, f: IntPolynomial, p: int) -> bool:
    """True iff g divides f in F_p[x]."""
    return not poly_rem_mod(f.coefficients, g.coefficients, p)


# --- integer matrices ----------------------------------------------------------------


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("IntMatrix must be square")
        object.__setattr__(self, "rows", rows)

    @property
    def order(self) -> int:
        return len(self.rows)

    @property
    def max_entry(self) -> int:
        return max((abs(v) for r in self.rows for v in r), default=0)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    @classmethod
    def lifted(cls, rows, p: int) -> IntMatrix:
        """Height-minimal integer lift of a matrix over F_p."""
        return cls(tuple(tuple(lift(int(v), p) for v in r) for r in rows))


def _rows(m) -> list[list[int]]:
    if isinstance(m, IntMatrix):
        return m.tolist()
    return [list(map(int, r)) for r in m]


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_mul(a, b, p: int | None = None) -> list[list[int]]:
    a, b = _rows(a), _rows(b)
    cols = list(zip(*b))
    out = [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]
    if p is not None:
        out = [[v % p for v in row] for row in out]
    return out


def det_int(m) -> int:
    """Exact integer determinant (Bareiss fraction-free elimination)."""
    a = _rows(m)
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def adjugate_int(m) -> list[list[int]]:
    """Exact integer adjugate: adj(M) M = det(M) I."""
    a = _rows(m)
    n = len(a)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            minor = [row[:c] + row[c + 1:] for i, row in enumerate(a) if i != r]
            adj[c][r] = (-1) ** (r + c) * det_int(minor)
    return adj


class DetAdjugate(NamedTuple):
    det: FieldElement
    adjugate: tuple[tuple[FieldElement, ...], ...]
    bound: int


def det_adjugate_mod(m, p: int, entry_bound: int | None = None) -> DetAdjugate:
    """det(M) and adj(M) reduced mod p, plus the magnitude bound d! C^d.

    ``entry_bound`` defaults to the largest absolute entry of the integer input.
    """
    p = check_modulus(p)
    rows = _rows(m)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("det_adjugate_mod needs a non-empty square matrix")
    c = entry_bound if entry_bound is not None else max(abs(v) for r in rows for v in r)
    det = FieldElement(det_int(rows), p)
    adj = tuple(tuple(FieldElement(v, p) for v in r) for r in adjugate_int(rows))
    return DetAdjugate(det, adj, math.factorial(n) * max(c, 1) ** n)


def char_poly(m) -> IntPolynomial:
    """det(xI - M) over Z by the Faddeev-LeVerrier recursion (divisions are exact)."""
    a = _rows(m)
    n = len(a)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    mk = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        mk = mat_mul(a, mk)
        for i in range(n):
            mk[i][i] += coeffs[n - k + 1]
        am = mat_mul(a, mk)
        tr = sum(am[i][i] for i in range(n))
        assert tr % k == 0
        coeffs[n - k] = -tr // k
    return IntPolynomial(tuple(coeffs))


def mat_poly_eval_mod(f: IntPolynomial, x, p: int) -> list[list[int]]:
    """f(X) mod p by Horner's rule over matrices."""
    xs = [[v % p for v in r] for r in _rows(x)]
    n = len(xs)
    acc = [[0] * n for _ in range(n)]
    for c in reversed(f.coefficients):
        acc = mat_mul(acc, xs, p)
        for i in range(n):
            acc[i][i] = (acc[i][i] + c) % p
    return acc


def companion(coeffs: Sequence[int]) -> list[list[int]]:
    """Companion matrix of the monic x^n + c_{n-1} x^{n-1} + ... + c_0 (coeffs = c_0..c_{n-1})."""
    n = len(coeffs)
    m = [[0] * n for _ in range(n)]
    for i in range(n - 1):
        m[i][i + 1] = 1
    for j in range(n):
        m[n - 1][j] = -int(coeffs[j])
    return m
