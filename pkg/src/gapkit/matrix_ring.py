"""GAPs of matrices in M_n(F_p) and recovery of polynomials annihilating their generators.

Linear searches over matrix generators run on a scalar fingerprint
phi(X) = sum_e w_e X_e (mod p); every candidate is then checked entrywise, so
fingerprint collisions cost time but never correctness.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from . import mitm
from .core_arith import (IntMatrix, IntPolynomial, adjugate_int, check_modulus, det_int,
                         identity, mat_mul, mat_poly_eval_mod)
from .decompose import DecompositionTable
from .errors import (AmbiguousDecomposition, CapExceeded, HypothesisFailure, NotContained,
                     NotInvertible, NotIsolated, NotProper, PreconditionError,
                     ProductNotContained, SRepresentationNotFound)
from .gap import (IsolationWitness, ProductViolation, Verdict, augmented, bilinear_scan,
                  box_vectors, isolation_ranges)
from .recovery import (RecoveryConfig, RecoveryReport, _fail, coefficient_matrices,
                       finish_polynomials, singular_failure)
from .rng import SplitMix64

log = logging.getLogger(__name__)

Matrix = tuple[tuple[int, ...], ...]


def _as_matrix(m, p: int) -> Matrix:
    return tuple(tuple(int(v) % p for v in row) for row in m)


def _flat(m: Matrix) -> tuple[int, ...]:
    return tuple(v for row in m for v in row)


@dataclass(frozen=True)
class MatGap:
    """Symmetric GAP {sum a_i X_i : |a_i| <= N_i} in M_n(F_p)."""

    modulus: int
    dimension: int
    generators: tuple[Matrix, ...]
    bounds: tuple[int, ...]

    def __post_init__(self):
        p = check_modulus(self.modulus)
        n = int(self.dimension)
        gens = tuple(_as_matrix(g, p) for g in self.generators)
        if not gens or len(gens) != len(self.bounds):
            raise ValueError("need one bound per generator (at least one)")
        if any(len(g) != n or any(len(r) != n for r in g) for g in gens):
            raise ValueError(f"generators must be {n}x{n}")
        if any(int(b) < 1 for b in self.bounds):
            raise ValueError("bounds must be positive")
        object.__setattr__(self, "modulus", p)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "bounds", tuple(int(b) for b in self.bounds))

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def ranges(self):
        return tuple((-b, b) for b in self.bounds)

    @property
    def box_size(self) -> int:
        return math.prod(2 * b + 1 for b in self.bounds)

    def evaluate(self, coeffs: Sequence[int]) -> Matrix:
        return combine(self.generators, coeffs, self.modulus)

    @classmethod
    def from_gap(cls, g) -> MatGap:
        """The 1x1 embedding of a scalar symmetric GAP."""
        return cls(g.modulus, 1, tuple(((x,),) for x in g.generators), g.bounds)

    def to_json(self):
        return {"p": str(self.modulus), "n": self.dimension,
                "generators": [[str(v) for v in _flat(g)] for g in self.generators],
                "bounds": list(self.bounds), "base_point": "0"}

    @classmethod
    def from_json(cls, data) -> MatGap:
        n = int(data["n"])
        gens = []
        for flat in data["generators"]:
            vals = [int(v) for v in flat]
            gens.append(tuple(tuple(vals[r * n:(r + 1) * n]) for r in range(n)))
        return cls(int(data["p"]), n, tuple(gens), tuple(int(b) for b in data["bounds"]))


def combine(gens: Sequence[Matrix], coeffs: Sequence[int], p: int) -> Matrix:
    n = len(gens[0])
    return tuple(tuple(sum(a * g[r][c] for a, g in zip(coeffs, gens)) % p for c in range(n))
                 for r in range(n))


def mat_inverse_mod(m: Matrix, p: int) -> Matrix | None:
    det = det_int(m) % p
    if det == 0:
        return None
    inv = pow(det, -1, p)
    return tuple(tuple(v * inv % p for v in row) for row in adjugate_int(m))


def _weights(n: int, p: int) -> list[int]:
    if n == 1:
        return [1]
    rng = SplitMix64(0x6A9)
    return [rng.randbelow(p - 1) + 1 for _ in range(n * n)]


class _MatSolver:
    def __init__(self, gens: Sequence[Matrix], ranges, p: int, cap=None):
        self.gens, self.p = tuple(gens), p
        self.w = _weights(len(gens[0]), p)
        keys = [self.key(g) for g in gens]
        self.inner = mitm.solver(keys, ranges, p, cap)

    def key(self, m: Matrix) -> int:
        return sum(w * v for w, v in zip(self.w, _flat(m))) % self.p

    def iter_solutions(self, target: Matrix, nonzero=False) -> Iterator[tuple[int, ...]]:
        target = _as_matrix(target, self.p)
        for vec in self.inner.iter_solutions(self.key(target), nonzero):
            if combine(self.gens, vec, self.p) == target:
                yield vec

    def first(self, target: Matrix, nonzero=False):
        return next(self.iter_solutions(target, nonzero), None)


def mat_decompose(z, b: MatGap, cap: int | None = None, strict: bool = True):
    """Coefficients with sum a_k X_k = Z entrywise mod p, or None."""
    s = _MatSolver(b.generators, b.ranges, b.modulus, cap)
    it = s.iter_solutions(z)
    sols = [v for v, _ in zip(it, range(2 if strict else 1))]
    if not sols:
        return None
    if len(sols) > 1:
        raise AmbiguousDecomposition(sols)
    return sols[0]


def is_proper_mat(b: MatGap, cap: int | None = None) -> Verdict:
    s = _MatSolver(b.generators, tuple((-2 * n, 2 * n) for n in b.bounds), b.modulus, cap)
    zero = tuple((0,) * b.dimension for _ in range(b.dimension))
    delta = s.first(zero, nonzero=True)
    if delta is None:
        return Verdict(True)
    u = tuple(-((-dl) // 2) for dl in delta)
    v = tuple(ui - dl for ui, dl in zip(u, delta))
    return Verdict(False, (u, v) if u > v else (v, u))


def is_isolated_mat(b: MatGap, kappa, cap: int | None = None) -> Verdict:
    s = _MatSolver(b.generators, isolation_ranges(b, kappa), b.modulus, cap)
    zero = tuple((0,) * b.dimension for _ in range(b.dimension))
    vec = s.first(zero, nonzero=True)
    return Verdict(True) if vec is None else Verdict(False, IsolationWitness(vec))


def contains_product_mat(a: MatGap, a2: MatGap, b: MatGap, cap: int | None = None) -> Verdict:
    """Every product X Y with X in A, Y in A' lies in B (order matters)."""
    p = b.modulus
    cap = mitm.resolve_cap(cap)
    size = a.box_size * a2.box_size
    if size > cap:
        raise CapExceeded(size, cap, "product set")
    va, vb = box_vectors(a.ranges), box_vectors(a2.ranges)
    member = _MatSolver(b.generators, b.ranges, p, cap)
    wide = _MatSolver(b.generators, b.ranges, p, cap)
    table = []
    for ya in a.generators:
        row = []
        for yb in a2.generators:
            vec = wide.first(mat_mul(ya, yb, p))
            row.append(vec)
        table.append(row)
    if any(v is None for row in table for v in row):
        table = [[(0,) * b.rank] * a2.rank] * a.rank
        lo, hi = np.zeros(b.rank, dtype=np.int64), np.full(b.rank, -1, dtype=np.int64)
    else:
        lo = np.array([r[0] for r in b.ranges], dtype=np.int64)
        hi = np.array([r[1] for r in b.ranges], dtype=np.int64)

    def is_member(ia, ib):
        return np.array([
            member.first(mat_mul(combine(a.generators, va[x].tolist(), p),
                                 combine(a2.generators, vb[y].tolist(), p), p)) is not None
            for x, y in zip(ia, ib)], dtype=bool)

    bad = bilinear_scan(va, vb, table, lo, hi, is_member, chunk=256)
    if bad is None:
        return Verdict(True)
    x, y = bad
    return Verdict(False, ProductViolation(0, 0, tuple(int(v) for v in va[x]),
                                           tuple(int(v) for v in vb[y])))


def verify_matrix_poly(f: IntPolynomial, x, p: int) -> bool:
    """True iff f(X) is the zero matrix mod p."""
    return all(v == 0 for row in mat_poly_eval_mod(f, x, p) for v in row)


def _scaled(m: Matrix, s: int, p: int) -> Matrix:
    return tuple(tuple(v * s % p for v in row) for row in m)


def recover_matrix_generators(b: MatGap, a: MatGap, a2: MatGap, i: int | None = None,
                              j: int | None = None,
                              config: RecoveryConfig = RecoveryConfig()) -> RecoveryReport:
    """Matrix-ring analogue of recover_generators with pivots Y_i (left) and Y'_j (right)."""
    p, n, d = b.modulus, b.dimension, b.rank
    if not (a.modulus == a2.modulus == p and a.rank == a2.rank == d
            and a.dimension == a2.dimension == n):
        raise PreconditionError("A, A' and B must share modulus, dimension and rank")
    if b.generators[0] != tuple(map(tuple, identity(n))):
        raise PreconditionError("X_1 must be the identity matrix")
    report = RecoveryReport(p, d)
    cap = config.cap
    if config.check_hypotheses:
        iso = is_isolated_mat(b, config.kappa, cap)
        if not iso:
            raise _fail(report, NotIsolated(iso.witness.coefficients, config.kappa))
        for name, g in (("A", a), ("A'", a2)):
            pr = is_proper_mat(g, cap)
            if not pr:
                raise _fail(report, NotProper(name, pr.witness))
        for side, (l, r) in (("AA'", (a, a2)), ("A'A", (a2, a))):
            res = contains_product_mat(l, r, b, cap)
            if not res:
                raise _fail(report, ProductNotContained(res.witness, side))

    inv_a = [mat_inverse_mod(y, p) for y in a.generators]
    inv_a2 = [mat_inverse_mod(y, p) for y in a2.generators]
    if i is not None and inv_a[i - 1] is None:
        raise _fail(report, NotInvertible(f"Y_{i}"))
    if j is not None and inv_a2[j - 1] is None:
        raise _fail(report, NotInvertible(f"Y'_{j}"))
    pairs = [(x, y) for x in range(d) for y in range(d)
             if inv_a[x] is not None and inv_a2[y] is not None]
    if i is not None and j is not None:
        first = (i - 1, j - 1)
        pairs = [first] + ([q for q in pairs if q != first] if config.retry_pivots else [])
    elif i is not None or j is not None:
        pairs = [q for q in pairs if (i is None or q[0] == i - 1) and (j is None or q[1] == j - 1)]
    if not pairs:
        raise _fail(report, NotInvertible("every pivot pair (Y_i, Y'_j)"))

    solver = _MatSolver(b.generators, b.ranges, p, cap)
    entries, ambiguous = [], []
    for u, ya in enumerate(a.generators):
        row = []
        for w, yb in enumerate(a2.generators):
            sols = [v for v, _ in zip(solver.iter_solutions(mat_mul(ya, yb, p)), range(2))]
            if not sols:
                raise _fail(report, NotContained(u, w))
            if len(sols) > 1:
                ambiguous.append((u, w))
            row.append(sols[0])
        entries.append(tuple(row))
    table = DecompositionTable(tuple(entries), tuple(ambiguous))
    report.table = table
    report.ambiguous.extend(("table",) + q for q in ambiguous)
    report.table_height_observed = table.bound_observed
    report.table_height_bound = config.table_height_bound()
    report.adjugate_bound = config.adjugate_bound(d)
    report.s_cap = config.s_cap(d)

    first_failure = None
    for pi, pj in pairs:
        try:
            _run_matrix_pivot(report, b, a, a2, table, pi, pj, inv_a[pi], inv_a2[pj], config)
            return report
        except HypothesisFailure as exc:
            report.pivot_failures.append({"pivot": [pi + 1, pj + 1], **exc.to_dict()})
            first_failure = first_failure or exc
    raise _fail(report, first_failure)


def _run_matrix_pivot(report, b, a, a2, table, i, j, yi_inv, yj_inv, config):
    p, d = b.modulus, b.rank
    t, t_prime = coefficient_matrices(table, i, j)
    det_t, det_tp = det_int(t) % p, det_int(t_prime) % p
    if det_t == 0:
        raise singular_failure(t, p, "A'", "T is singular mod p")
    if det_tp == 0:
        raise singular_failure(t_prime, p, "A", "T' is singular mod p")
    scale = det_t * det_tp % p
    wide = _MatSolver(b.generators, ((-report.s_cap, report.s_cap),) * d, p, config.cap)
    x = b.generators
    t_list, ambiguous = [], []
    for k in range(d):
        rows = []
        for l in range(d):
            z = mat_mul(mat_mul(yi_inv, _scaled(mat_mul(x[k], x[l], p), scale, p), p), yj_inv, p)
            sols = [v for v, _ in zip(wide.iter_solutions(z), range(2))]
            if not sols:
                raise SRepresentationNotFound(k, l, report.s_cap)
            if len(sols) > 1:
                ambiguous.append(("s", k + 1, l + 1))
            rows.append(list(sols[0]))
        t_list.append(rows)
    if det_int(t_list[0]) % p == 0:
        raise singular_failure(t_list[0], p, "B", "T_1 is singular mod p")
    det1, fs, gs, flags = finish_polynomials(
        t_list, p, lambda k, g: verify_matrix_poly(g, x[k], p))
    yi = a.generators[i]
    consistent = []
    for k, f in enumerate(fs):
        direct = verify_matrix_poly(f, _scaled(x[k], det1, p), p)
        conj = mat_mul(mat_mul(yi_inv, x[k], p), yi, p)
        consistent.append(direct == verify_matrix_poly(f, _scaled(conj, det1, p), p))
    report.pivot, report.pivot_prime = i + 1, j + 1
    report.T, report.T_prime = IntMatrix(t), IntMatrix(t_prime)
    report.det_T, report.det_T_prime = det_t, det_tp
    report.adjugate_observed = max(max(abs(v) for r in adjugate_int(m) for v in r)
                                   for m in (t, t_prime))
    report.T_j = tuple(IntMatrix(m) for m in t_list)
    report.s_observed = max(abs(v) for m in t_list for r in m for v in r)
    report.det_T1 = det1
    report.f, report.g, report.verified = fs, gs, flags
    report.conjugation_consistent = tuple(consistent)
    report.ambiguous.extend(ambiguous)
