"""Seedable fixture generators.

Positive fixtures put algebraic generators x = (1, t, ..., t^(d-1)) in B, with t a
root mod p of a monic integer polynomial of small height. Negative fixtures are
the degenerate (1, N) progression and random generators. Matrix fixtures use
powers of a companion matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor

from .core_arith import (check_modulus, companion, floor_scaled_power, identity, is_prime, iroot,
                         mat_mul, sqrt_residue)
from .decompose import check_epsilon
from .errors import NoRoot, PreconditionError
from .gap import Gap, contains_product, is_isolated, is_proper
from .matrix_ring import (MatGap, combine, contains_product_mat, is_isolated_mat, is_proper_mat,
                          mat_inverse_mod)
from .rng import SplitMix64

log = logging.getLogger(__name__)

KINDS = ("quadratic", "general_algebraic", "degenerate", "random", "matrix")
FORMAT = "gapkit-instance/1"


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    p: int
    d: int = 2
    n_bound: int | None = None
    c: Fraction = Fraction(1, 2)
    c_prime: Fraction = Fraction(1, 2)
    epsilon: Fraction = Fraction(1, 2)
    poly: tuple[int, ...] = ()
    rng_seed: int = 0
    n: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        check_modulus(self.p)
        if self.d < 1:
            raise ValueError("d must be positive")
        for name in ("c", "c_prime"):
            val = Fraction(getattr(self, name))
            if not 0 < val < 1:
                raise ValueError(f"{name} must lie strictly between 0 and 1")
            object.__setattr__(self, name, val)
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        object.__setattr__(self, "poly", tuple(int(v) for v in self.poly))
        if self.poly and len(self.poly) != self.d:
            raise ValueError("poly lists c_0..c_{d-1} of a monic degree-d polynomial")

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["p"] = str(self.p)
        for name in ("c", "c_prime", "epsilon"):
            out[name] = str(out[name])
        out["poly"] = [str(v) for v in self.poly]
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> InstanceSpec:
        return cls(kind=data["kind"], p=int(data["p"]), d=int(data["d"]),
                   n_bound=None if data.get("n_bound") is None else int(data["n_bound"]),
                   c=Fraction(data["c"]), c_prime=Fraction(data["c_prime"]),
                   epsilon=Fraction(data["epsilon"]),
                   poly=tuple(int(v) for v in data.get("poly", ())),
                   rng_seed=int(data.get("rng_seed", 0)), n=int(data.get("n", 1)))


@dataclass
class Instance:
    spec: InstanceSpec
    b: Gap | MatGap
    a: Gap | MatGap
    a_prime: Gap | MatGap
    root: int | None = None
    flags: dict[str, bool] = field(default_factory=dict)

    @property
    def is_matrix(self) -> bool:
        return isinstance(self.b, MatGap)

    def to_json(self) -> dict[str, Any]:
        return {"format": FORMAT, "spec": self.spec.to_json(), "B": self.b.to_json(),
                "A": self.a.to_json(), "A_prime": self.a_prime.to_json(),
                "root": None if self.root is None else str(self.root), "flags": self.flags}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Instance:
        load = MatGap.from_json if "n" in data["B"] else Gap.from_json
        return cls(InstanceSpec.from_json(data["spec"]), load(data["B"]), load(data["A"]),
                   load(data["A_prime"]), None if data.get("root") is None else int(data["root"]),
                   dict(data.get("flags", {})))


# --- parameter helpers ---------------------------------------------------------------


def random_prime(rng: SplitMix64, lo: int, hi: int) -> int:
    while True:
        q = rng.randint(lo, hi) | 1
        if q <= hi and is_prime(q):
            return q


def rank2_bound(p: int) -> int:
    """Largest N with (2N+1)^3 <= p, which also gives (2N+1)^2 <= p^(2/3)."""
    return (iroot(p, 3) - 1) // 2


def guards_hold(p: int, n: int) -> bool:
    return (2 * n + 1) ** 3 <= p


def sample_quadratic(rng: SplitMix64, p: int, height: int = 3) -> tuple[int, int]:
    """(c_0, c_1) with x^2 + c_1 x + c_0 irreducible over Q and split mod p."""
    while True:
        c0, c1 = rng.randint(-height, height), rng.randint(-height, height)
        disc = c1 * c1 - 4 * c0
        if disc >= 0 and math.isqrt(disc) ** 2 == disc:
            continue
        if pow(disc % p, (p - 1) // 2, p) == 1:
            return c0, c1


def sample_irreducible(rng: SplitMix64, p: int, d: int, height: int = 3) -> tuple[int, ...]:
    """Coefficients c_0..c_{d-1} of a monic polynomial irreducible over Q with a root mod p."""
    from sympy import Poly, symbols
    x = symbols("x")
    while True:
        coeffs = tuple(rng.randint(-height, height) for _ in range(d))
        if coeffs[0] == 0:
            continue
        f = Poly([1] + list(reversed(coeffs)), x)
        if f.is_irreducible and roots_mod(coeffs, p):
            return coeffs


def roots_mod(coeffs, p: int) -> list[int]:
    """Sorted roots in F_p of x^d + c_{d-1} x^{d-1} + ... + c_0."""
    coeffs = [int(v) for v in coeffs]
    if len(coeffs) == 2:
        c0, c1 = coeffs
        s = sqrt_residue((c1 * c1 - 4 * c0) % p, p)
        if s is None:
            return []
        half = pow(2, -1, p)
        return sorted({(-c1 + s) * half % p, (-c1 - s) * half % p})
    dense = [1] + [v % p for v in reversed(coeffs)]
    _, factors = gf_factor(dense, p, ZZ)
    return sorted({int(-f[1]) % p for f, _ in factors if len(f) == 2})


def _box(c, n: int, eps) -> int:
    m = floor_scaled_power(c, n, eps)
    if m < 1:
        raise PreconditionError(f"the box bound floor({c} * {n}^{eps}) is zero; raise N")
    return m


def _unimodular(rng: SplitMix64, d: int) -> list[list[int]]:
    """L R with L unit lower- and R unit upper-triangular, entries in {-1, 0, 1}."""
    lower = [[1 if i == j else (rng.randint(-1, 1) if j < i else 0) for j in range(d)]
             for i in range(d)]
    upper = [[1 if i == j else (rng.randint(-1, 1) if j > i else 0) for j in range(d)]
             for i in range(d)]
    return mat_mul(lower, upper)


def _field_flags(b: Gap, a: Gap, a2: Gap, kappa=6, cap=None) -> dict[str, bool]:
    flags = {"B_proper": bool(is_proper(b, cap)), "B_isolated": bool(is_isolated(b, kappa, cap)),
             "A_proper": bool(is_proper(a, cap)), "A_prime_proper": bool(is_proper(a2, cap)),
             "contained": bool(contains_product(a, a2, b, cap))}
    flags["guards"] = guards_hold(b.modulus, max(b.bounds))
    return flags


# --- generators ----------------------------------------------------------------------


def gen_quadratic(p: int, c0: int, c1: int, c, n: int) -> tuple[Gap, Gap]:
    """B = {a + b t : |a|, |b| <= N} and A the c N^(1/2) box, with t^2 + c_1 t + c_0 = 0."""
    roots = roots_mod((c0, c1), p)
    if not roots:
        raise NoRoot(f"{c1}^2 - 4*{c0} is not a square mod {p}")
    t = roots[0]
    m = _box(c, n, Fraction(1, 2))
    return Gap(p, (1, t), (n, n)), Gap(p, (1, t), (m, m))


def gen_general(p: int, poly, c, c_prime, eps, n: int, seed: int = 0,
                attempts: int = 32) -> tuple[Gap, Gap, Gap, dict]:
    """Rank-d fixture from a root t of the monic polynomial with coefficients ``poly``.

    A and A' use generators U x and U' x for small unimodular U, U'; draws repeat
    until A A' lies in B or the attempts run out (then the flag is left false).
    """
    d = len(poly)
    roots = roots_mod(poly, p)
    if not roots:
        raise NoRoot(f"no root mod {p} for coefficients {tuple(poly)}")
    t = roots[0]
    xs = [pow(t, k, p) for k in range(d)]
    b = Gap(p, xs, (n,) * d)
    m, m2 = _box(c, n, 1 - Fraction(eps)), _box(c_prime, n, eps)
    rng = SplitMix64(seed, 7)
    best = None
    for attempt in range(attempts):
        u, u2 = _unimodular(rng, d), _unimodular(rng, d)
        ys = [sum(r * x for r, x in zip(row, xs)) for row in u]
        ys2 = [sum(r * x for r, x in zip(row, xs)) for row in u2]
        a, a2 = Gap(p, ys, (m,) * d), Gap(p, ys2, (m2,) * d)
        if contains_product(a, a2, b):
            return b, a, a2, {"attempts": attempt + 1, "root": t}
        best = best or (a, a2)
        log.info("containment failed on attempt %d, redrawing", attempt + 1)
    return b, best[0], best[1], {"attempts": attempts, "root": t}


def gen_degenerate(p: int, n: int) -> tuple[Gap, Gap]:
    """B = {a + b N : 0 <= a, b < N} = [0, N^2 - 1] and A = [0, N - 1].

    A is written with B's generators (second range {0}) so the ranks agree.
    """
    if n * n >= p:
        raise PreconditionError("need N^2 < p")
    if n < 2:
        raise PreconditionError("need N >= 2")
    return Gap(p, (1, n), (n, n), one_sided=True), Gap(p, (1, n), (n, 1), one_sided=True)


def gen_random(p: int, d: int, n: int, seed: int) -> Gap:
    rng = SplitMix64(seed, 11)
    return Gap(p, (1,) + tuple(rng.randbelow(p) for _ in range(d - 1)), (n,) * d)


def _companion_powers(poly, p: int) -> list[tuple[tuple[int, ...], ...]]:
    cm = companion(poly)
    n = len(poly)
    out, cur = [], identity(n)
    for _ in range(n):
        out.append(tuple(tuple(v % p for v in row) for row in cur))
        cur = mat_mul(cur, cm, p)
    return out


def gen_matrix(p: int, n: int, poly, c, c_prime, eps, n_bound: int, seed: int = 0,
               attempts: int = 32) -> tuple[MatGap, MatGap, MatGap, dict]:
    """X_k = C^(k-1) for the companion matrix C of ``poly`` (so d = n), Y = U X, Y' = U' X.

    With n = 1 the field fixture for the same polynomial is embedded instead, and
    ``poly`` then describes the scalar root's polynomial.
    """
    if n == 1:
        b, a, a2, info = gen_general(p, poly, c, c_prime, eps, n_bound, seed, attempts)
        return MatGap.from_gap(b), MatGap.from_gap(a), MatGap.from_gap(a2), info
    if len(poly) != n:
        raise PreconditionError("matrix fixtures use d = n companion powers")
    xs = _companion_powers(poly, p)
    d = n
    b = MatGap(p, n, tuple(xs), (n_bound,) * d)
    m, m2 = _box(c, n_bound, 1 - Fraction(eps)), _box(c_prime, n_bound, eps)
    rng = SplitMix64(seed, 13)
    regenerated = 0
    best = None
    for attempt in range(attempts):
        u, u2 = _unimodular(rng, d), _unimodular(rng, d)
        ys = tuple(combine(xs, row, p) for row in u)
        ys2 = tuple(combine(xs, row, p) for row in u2)
        if mat_inverse_mod(ys[0], p) is None or mat_inverse_mod(ys2[0], p) is None:
            regenerated += 1
            log.info("singular pivot generator on attempt %d, regenerating", attempt + 1)
            continue
        a, a2 = MatGap(p, n, ys, (m,) * d), MatGap(p, n, ys2, (m2,) * d)
        if contains_product_mat(a, a2, b) and contains_product_mat(a2, a, b):
            return b, a, a2, {"attempts": attempt + 1, "regenerated": regenerated}
        best = best or (a, a2)
    if best is None:
        raise PreconditionError("no draw gave invertible pivot generators")
    return b, best[0], best[1], {"attempts": attempts, "regenerated": regenerated}


def _matrix_flags(b: MatGap, a: MatGap, a2: MatGap, kappa=6, cap=None) -> dict[str, bool]:
    return {"B_proper": bool(is_proper_mat(b, cap)),
            "B_isolated": bool(is_isolated_mat(b, kappa, cap)),
            "A_proper": bool(is_proper_mat(a, cap)), "A_prime_proper": bool(is_proper_mat(a2, cap)),
            "contained": bool(contains_product_mat(a, a2, b, cap)),
            "contained_reverse": bool(contains_product_mat(a2, a, b, cap))}


def default_bound(spec: InstanceSpec) -> int:
    p = spec.p
    if spec.kind == "quadratic":
        return rank2_bound(p)
    if spec.kind == "degenerate":
        return max(2, iroot(p, 4))
    if spec.d == 2 or spec.kind == "matrix":
        return max(2, math.isqrt(p // 300))
    return max(2, iroot(p // 300 ** (spec.d - 1), spec.d))


def generate(spec: InstanceSpec, verify: bool = True) -> Instance:
    """Build the fixture described by ``spec``; with ``verify`` the hypothesis flags are filled."""
    n = spec.n_bound or default_bound(spec)
    p = spec.p
    rng = SplitMix64(spec.rng_seed, 3)
    if spec.kind == "quadratic":
        c0, c1 = spec.poly or sample_quadratic(rng, p)
        b, a = gen_quadratic(p, c0, c1, spec.c, n)
        spec = InstanceSpec(**{**_fields(spec), "poly": (c0, c1), "n_bound": n})
        inst = Instance(spec, b, a, a, b.generators[1])
        if verify:
            inst.flags = _field_flags(b, a, a)
        return inst
    if spec.kind == "general_algebraic":
        poly = spec.poly or (sample_quadratic(rng, p) if spec.d == 2
                             else sample_irreducible(rng, p, spec.d))
        b, a, a2, info = gen_general(p, poly, spec.c, spec.c_prime, spec.epsilon, n, spec.rng_seed)
        spec = InstanceSpec(**{**_fields(spec), "poly": tuple(poly), "n_bound": n})
        inst = Instance(spec, b, a, a2, info["root"])
        if verify:
            inst.flags = _field_flags(b, a, a2)
        return inst
    if spec.kind == "degenerate":
        b, a = gen_degenerate(p, n)
        spec = InstanceSpec(**{**_fields(spec), "d": 2, "n_bound": n})
        inst = Instance(spec, b, a, a)
        if verify:
            inst.flags = {"B_proper": bool(is_proper(b)), "B_isolated": bool(is_isolated(b, 6)),
                          "contained": bool(contains_product(a, a, b))}
        return inst
    if spec.kind == "random":
        b = gen_random(p, spec.d, n, spec.rng_seed)
        m, m2 = _box(spec.c, n, 1 - spec.epsilon), _box(spec.c_prime, n, spec.epsilon)
        a, a2 = Gap(p, b.generators, (m,) * spec.d), Gap(p, b.generators, (m2,) * spec.d)
        spec = InstanceSpec(**{**_fields(spec), "n_bound": n})
        inst = Instance(spec, b, a, a2)
        if verify:
            inst.flags = {"B_isolated": bool(is_isolated(b, 6))}
        return inst
    # matrix
    dim = spec.n
    d = spec.d if dim == 1 else dim
    poly = spec.poly or (sample_quadratic(rng, p) if d == 2 else sample_irreducible(rng, p, d))
    b, a, a2, info = gen_matrix(p, dim, poly, spec.c, spec.c_prime, spec.epsilon, n,
                                spec.rng_seed)
    spec = InstanceSpec(**{**_fields(spec), "d": d, "poly": tuple(poly), "n_bound": n})
    inst = Instance(spec, b, a, a2, info.get("root"))
    if verify:
        inst.flags = _matrix_flags(b, a, a2)
    return inst


def _fields(spec: InstanceSpec) -> dict[str, Any]:
    return {k: getattr(spec, k) for k in spec.__dataclass_fields__}


def quadratic_batch(seed: int, count: int, lo: int = 10**5, hi: int = 10**9,
                    c=Fraction(1, 2)) -> list[Instance]:
    """``count`` rank-2 fixtures with p drawn from [lo, hi] and N maximal under the guards."""
    out = []
    for k in range(count):
        rng = SplitMix64(seed, 1000 + k)
        p = random_prime(rng, lo, hi)
        out.append(generate(InstanceSpec("quadratic", p, c=c, rng_seed=rng.next64()),
                            verify=False))
    return out
