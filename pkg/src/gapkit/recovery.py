"""Recovering low-height polynomials satisfied by the generators of a GAP B
that contains a product set AA'.

The pipeline decomposes the generator products y_i y'_j in B's basis, builds the
coefficient matrices T and T' for a pivot index i, expresses
det(T) det(T') x_j x_k / (y_i y'_i) in B's basis to obtain matrices T_j with
T_j v = lambda_j v (v = (x_1, ..., x_d)), and reads off the characteristic
polynomial of adj(T_1) T_j, whose root is det(T_1) x_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .core_arith import (IntMatrix, IntPolynomial, _rows, adjugate_int, char_poly,
                         check_modulus, det_int, lift, mat_mul)
from .decompose import DecompositionTable, check_epsilon, decompose, decompose_products
from .errors import (AmbiguousDecomposition, HypothesisFailure, NotContained, NotIsolated,
                     NotProper, NotSingular, PreconditionError, ProductNotContained,
                     SRepresentationNotFound)
from .gap import Gap, contains_product, difference_gap, is_isolated, is_proper, sumset_scale


def _fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class RecoveryConfig:
    c: Fraction = Fraction(1, 2)
    c_prime: Fraction = Fraction(1, 2)
    epsilon: Fraction = Fraction(1, 2)
    kappa: Fraction = Fraction(6)
    pivot_index: int = 1
    search_height_cap: int | None = None
    retry_pivots: bool = True
    check_hypotheses: bool = True
    cap: int | None = None

    def __post_init__(self):
        for name in ("c", "c_prime"):
            val = _fraction(getattr(self, name))
            if not (0 < val < 1):
                raise ValueError(f"{name} must lie strictly between 0 and 1")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "epsilon", check_epsilon(_fraction(self.epsilon)))
        kappa = _fraction(self.kappa)
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        object.__setattr__(self, "kappa", kappa)
        if self.pivot_index < 1:
            raise ValueError("pivot_index is 1-based")

    @property
    def c_double_prime(self) -> Fraction:
        return self.c * self.c_prime / 2

    def table_height_bound(self) -> Fraction:
        return 3 / self.c_double_prime

    def adjugate_bound(self, d: int) -> Fraction:
        """C = (d-1)! 3^(d-1) / c''^(d-1), the entry bound for adj(T)."""
        return math.factorial(d - 1) * Fraction(3) ** (d - 1) / self.c_double_prime ** (d - 1)

    def s_cap(self, d: int) -> int:
        if self.search_height_cap is not None:
            return int(self.search_height_cap)
        return math.ceil(self.adjugate_bound(d)) * 3


# --- bounded null vector -------------------------------------------------------------


def bounded_left_nullvector(t, p: int) -> tuple[int, ...]:
    """Nonzero integer a with a T = 0 mod p and |a_i| <= d! C^d.

    Entries are lifted to height-minimal integers first. A zero row gives a unit
    vector; otherwise a maximal independent row set R is found by elimination, a
    dependent row r and one extra column are adjoined to an invertible |R| x |R|
    minor, and the last row of the adjugate of that (|R|+1)-square matrix is used.
    """
    p = check_modulus(p)
    rows = [[lift(v, p) for v in r] for r in _rows(t)]
    d = len(rows)
    det = det_int(rows) % p
    if det:
        raise NotSingular(det)
    for i, r in enumerate(rows):
        if all(v % p == 0 for v in r):
            return tuple(int(k == i) for k in range(d))
    basis: list[tuple[int, list[int]]] = []
    independent: list[int] = []
    dependent = None
    for idx, r in enumerate(rows):
        red = [v % p for v in r]
        for col, brow in basis:
            f = red[col]
            if f:
                red = [(x - f * y) % p for x, y in zip(red, brow)]
        piv = next((c for c, v in enumerate(red) if v), None)
        if piv is None:
            dependent = idx
            break
        inv = pow(red[piv], -1, p)
        basis.append((piv, [v * inv % p for v in red]))
        independent.append(idx)
    assert dependent is not None
    cols = [c for c, _ in basis]
    extra = min(set(range(d)) - set(cols))
    sub_rows = independent + [dependent]
    sub = [[rows[r][c] for c in cols + [extra]] for r in sub_rows]
    last = adjugate_int(sub)[-1]
    a = [0] * d
    for m, r in enumerate(sub_rows):
        a[r] = last[m]
    if next(v for v in a if v) < 0:
        a = [-v for v in a]
    assert all(sum(a[i] * rows[i][j] for i in range(d)) % p == 0 for j in range(d))
    return tuple(a)


# --- rank two ----------------------------------------------------------------------


@dataclass(frozen=True)
class Rank2Result:
    polynomial: IntPolynomial
    a0: int
    b0: int
    height_bound: Fraction
    height_ok: bool
    guard_ok: bool
    ambiguous: bool = False


def _require_symmetric(g: Gap, name: str):
    if g.one_sided or g.base_point:
        raise PreconditionError(f"{name} must be a symmetric GAP with base point 0 "
                                "(see symmetrize)")


def recover_rank2(b: Gap, a: Gap, config: RecoveryConfig = RecoveryConfig(),
                  cap: int | None = None) -> Rank2Result:
    """Quadratic f with f(t) = 0 from t^2 = a_0 + b_0 t in B = {a + b t}.

    The height bound 8/c^2 and the size guard |B|^3 <= p^2 are reported as flags.
    """
    if b.rank != 2 or b.generators[0] != 1:
        raise PreconditionError("recover_rank2 needs B = {a + b t} with x_1 = 1")
    _require_symmetric(b, "B")
    decompose_products(a, a, b, cap)
    t = b.generators[1]
    p = b.modulus
    ambiguous = False
    try:
        vec = decompose(t * t % p, b, cap)
    except AmbiguousDecomposition as exc:
        vec, ambiguous = exc.solutions[0], True
    if vec is None:
        raise NotContained(1, 1, "t^2 has no bounded decomposition in B")
    a0, b0 = vec
    f = IntPolynomial((-a0, -b0, 1))
    bound = 8 / config.c ** 2
    return Rank2Result(f, a0, b0, bound, f.height <= bound, b.box_size ** 3 <= p ** 2,
                       ambiguous)


# --- general rank ------------------------------------------------------------------


@dataclass
class RecoveryReport:
    modulus: int
    rank: int
    pivot: int | None = None
    pivot_prime: int | None = None
    table: DecompositionTable | None = None
    T: IntMatrix | None = None
    T_prime: IntMatrix | None = None
    det_T: int | None = None
    det_T_prime: int | None = None
    T_j: tuple[IntMatrix, ...] = ()
    det_T1: int | None = None
    f: tuple[IntPolynomial, ...] = ()
    g: tuple[IntPolynomial, ...] = ()
    verified: tuple[bool, ...] = ()
    table_height_observed: int | None = None
    table_height_bound: Fraction | None = None
    adjugate_bound: Fraction | None = None
    adjugate_observed: int | None = None
    s_cap: int | None = None
    s_observed: int | None = None
    ambiguous: list = field(default_factory=list)
    pivot_failures: list = field(default_factory=list)
    conjugation_consistent: tuple[bool, ...] | None = None
    failure: dict | None = None

    @property
    def table_height_ok(self) -> bool | None:
        if self.table_height_observed is None:
            return None
        return self.table_height_observed < self.table_height_bound

    @property
    def heights(self) -> tuple[int, ...]:
        return tuple(g.height for g in self.g)

    @property
    def all_verified(self) -> bool:
        return bool(self.verified) and all(self.verified)

    @property
    def bound_flag(self) -> bool:
        return self.table_height_ok is False

    def to_json(self) -> dict[str, Any]:
        def mat(m):
            return None if m is None else [[str(v) for v in r] for r in m.rows]

        def poly(f):
            return {"coefficients": [str(c) for c in f.coefficients], "height": str(f.height),
                    "degree": f.degree}

        def frac(x):
            return None if x is None else str(x)

        def opt(x):
            return None if x is None else str(x)

        return {
            "p": str(self.modulus),
            "d": self.rank,
            "pivot": self.pivot,
            "pivot_prime": self.pivot_prime,
            "table": None if self.table is None else self.table.to_json(),
            "T": mat(self.T),
            "T_prime": mat(self.T_prime),
            "det_T": opt(self.det_T),
            "det_T_prime": opt(self.det_T_prime),
            "T_j": [mat(m) for m in self.T_j],
            "det_T1": opt(self.det_T1),
            "f": [poly(f) for f in self.f],
            "g": [poly(g) for g in self.g],
            "verified": list(self.verified),
            "all_verified": self.all_verified,
            "constants": {
                "table_height_observed": opt(self.table_height_observed),
                "table_height_bound": frac(self.table_height_bound),
                "table_height_ok": self.table_height_ok,
                "C": frac(self.adjugate_bound),
                "adjugate_observed": opt(self.adjugate_observed),
                "C_prime": opt(self.s_cap),
                "s_observed": opt(self.s_observed),
            },
            "ambiguous": [list(map(str, a)) for a in self.ambiguous],
            "pivot_failures": self.pivot_failures,
            "conjugation_consistent": (None if self.conjugation_consistent is None
                                       else list(self.conjugation_consistent)),
            "failure": self.failure,
        }


def _fail(report: RecoveryReport, exc: HypothesisFailure) -> HypothesisFailure:
    report.failure = exc.to_dict()
    exc.report = report
    return exc


def pivot_order(first: int, d: int, retry: bool) -> list[int]:
    if not 1 <= first <= d:
        raise PreconditionError(f"pivot {first} outside 1..{d}")
    return [first] + ([i for i in range(1, d + 1) if i != first] if retry else [])


def coefficient_matrices(table: DecompositionTable, i: int, j: int):
    """T with rows a_{i m} and T' with rows a_{m j} (0-based pivots)."""
    d = len(table.entries)
    t = [list(table.entries[i][m]) for m in range(d)]
    t_prime = [list(table.entries[m][j]) for m in range(d)]
    return t, t_prime


def finish_polynomials(t_list: Sequence[list[list[int]]], p: int,
                       check: Callable[[int, IntPolynomial], bool]):
    """det(T_1), f_j = charpoly(adj(T_1) T_j), primitive g_j(x) ~ f_j(det(T_1) x), flags."""
    t1 = t_list[0]
    det1 = det_int(t1)
    adj1 = adjugate_int(t1)
    fs, gs, flags = [], [], []
    for j, tj in enumerate(t_list):
        f = char_poly(mat_mul(adj1, tj))
        g = f.scale_argument(det1).primitive()
        fs.append(f)
        gs.append(g)
        flags.append(check(j, g))
    return det1, tuple(fs), tuple(gs), tuple(flags)


def singular_failure(t, p: int, which: str, detail: str) -> NotProper:
    return NotProper(which, bounded_left_nullvector(t, p), detail)


def recover_generators(b: Gap, a: Gap, a2: Gap,
                       config: RecoveryConfig = RecoveryConfig()) -> RecoveryReport:
    """Run the full pipeline; raises a HypothesisFailure (with ``.report``) on failure."""
    p = b.modulus
    d = b.rank
    if not (a.modulus == a2.modulus == p) or not (a.rank == a2.rank == d):
        raise PreconditionError("A, A' and B must share modulus and rank")
    if b.generators[0] != 1:
        raise PreconditionError("x_1 must equal 1; without it only generator ratios are "
                                "determined")
    report = RecoveryReport(p, d)
    cap = config.cap
    if config.check_hypotheses:
        iso = is_isolated(b, config.kappa, cap)
        if not iso:
            raise _fail(report, NotIsolated(iso.witness.coefficients, config.kappa))
    for name, g in (("B", b), ("A", a), ("A'", a2)):
        _require_symmetric(g, name)
    if config.check_hypotheses:
        for name, g in (("A", a), ("A'", a2)):
            pr = is_proper(g, cap)
            if not pr:
                raise _fail(report, NotProper(name, pr.witness))
    try:
        table = decompose_products(a, a2, b, cap)
    except NotContained as exc:
        raise _fail(report, exc)
    report.table = table
    report.ambiguous.extend(("table",) + ij for ij in table.ambiguous)
    report.table_height_observed = table.bound_observed
    report.table_height_bound = config.table_height_bound()
    report.adjugate_bound = config.adjugate_bound(d)
    report.s_cap = config.s_cap(d)

    first_failure = None
    for pivot in pivot_order(config.pivot_index, d, config.retry_pivots):
        try:
            _run_pivot(report, b, a, a2, table, pivot - 1, config)
            return report
        except HypothesisFailure as exc:
            report.pivot_failures.append({"pivot": pivot, **exc.to_dict()})
            first_failure = first_failure or exc
    raise _fail(report, first_failure)


def _run_pivot(report, b, a, a2, table, i, config):
    p, d = b.modulus, b.rank
    t, t_prime = coefficient_matrices(table, i, i)
    det_t, det_tp = det_int(t) % p, det_int(t_prime) % p
    if det_t == 0:
        raise singular_failure(t, p, "A'", "T is singular mod p")
    if det_tp == 0:
        raise singular_failure(t_prime, p, "A", "T' is singular mod p")
    yy = a.generators[i] * a2.generators[i] % p
    scale = det_t * det_tp * pow(yy, -1, p) % p
    s_cap = report.s_cap
    wide = Gap(p, b.generators, (s_cap,) * d)
    x = b.generators
    t_list, ambiguous = [], []
    for j in range(d):
        rows = []
        for k in range(d):
            z = scale * x[j] * x[k] % p
            try:
                vec = decompose(z, wide, config.cap)
            except AmbiguousDecomposition as exc:
                vec = exc.solutions[0]
                ambiguous.append(("s", j + 1, k + 1))
            if vec is None:
                raise SRepresentationNotFound(j, k, s_cap)
            rows.append(list(vec))
        t_list.append(rows)
    if det_int(t_list[0]) % p == 0:
        raise singular_failure(t_list[0], p, "B", "T_1 is singular mod p")
    det1, fs, gs, flags = finish_polynomials(
        t_list, p, lambda j, g: g(x[j]) % p == 0)
    report.pivot = report.pivot_prime = i + 1
    report.T, report.T_prime = IntMatrix(t), IntMatrix(t_prime)
    report.det_T, report.det_T_prime = det_t, det_tp
    report.adjugate_observed = max(max(abs(v) for r in adjugate_int(m) for v in r)
                                   for m in (t, t_prime))
    report.T_j = tuple(IntMatrix(m) for m in t_list)
    report.s_observed = max(abs(v) for m in t_list for r in m for v in r)
    report.det_T1 = det1
    report.f, report.g, report.verified = fs, gs, flags
    report.ambiguous.extend(ambiguous)


# --- non-symmetric inputs ------------------------------------------------------------


def symmetrize(b: Gap, a: Gap, a2: Gap, cap: int | None = None,
               verify: bool = True) -> tuple[Gap, Gap, Gap]:
    """(2(B - B), A - A, A' - A') for feeding a non-symmetric instance to the pipeline.

    Requires B to be 24-isolated, which makes 2(B - B) 6-isolated.
    """
    iso = is_isolated(b, 24, cap)
    if not iso:
        raise NotIsolated(iso.witness.coefficients, 24)
    b2 = sumset_scale(difference_gap(b), 2)
    ad, a2d = difference_gap(a), difference_gap(a2)
    if verify:
        res = contains_product(ad, a2d, b2, cap)
        if not res:
            raise ProductNotContained(res.witness, "(A-A)(A'-A')")
    return b2, ad, a2d
