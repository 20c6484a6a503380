import itertools
import json
import random
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from gapkit.core_arith import IntPolynomial, char_poly, divides_mod, identity, is_prime, mat_mul
from gapkit.errors import (AmbiguousDecomposition, NotInvertible, PreconditionError,
                           ProductNotContained)
from gapkit.instances import gen_general, gen_matrix
from gapkit.matrix_ring import (MatGap, combine, contains_product_mat, is_isolated_mat,
                                is_proper_mat, mat_decompose, mat_inverse_mod,
                                recover_matrix_generators, verify_matrix_poly)
from gapkit.recovery import RecoveryConfig, recover_generators

P = 1000003
CFG = RecoveryConfig(c=Fraction(1, 2), c_prime=Fraction(1, 4))
HALF, QUARTER = Fraction(1, 2), Fraction(1, 4)


def sqrt2_fixture(p=P, n_bound=57, seed=0):
    return gen_matrix(p, 2, (-2, 0), HALF, QUARTER, HALF, n_bound, seed)


def brute_products(a, a2):
    p = a.modulus
    xs = [combine(a.generators, v, p) for v in _box(a)]
    ys = [combine(a2.generators, v, p) for v in _box(a2)]
    return {tuple(map(tuple, mat_mul(x, y, p))) for x in xs for y in ys}


def _box(g):
    return list(itertools.product(*(range(lo, hi + 1) for lo, hi in g.ranges)))


def test_decompose_examples():
    x2 = ((0, 2), (1, 0))
    b = MatGap(101, 2, (identity(2), x2), (3, 3))
    z = combine(b.generators, (2, 3), 101)
    assert mat_decompose(z, b) == (2, 3)
    assert mat_decompose(((1, 5), (7, 1)), b) is None
    with pytest.raises(AmbiguousDecomposition):
        mat_decompose(identity(2), MatGap(101, 2, (identity(2), identity(2)), (2, 2)))


def test_decompose_round_trip_exhaustive():
    rng = random.Random(2)
    p = 211
    gens = (identity(2),) + tuple(
        tuple(tuple(rng.randrange(p) for _ in range(2)) for _ in range(2)) for _ in range(2))
    b = MatGap(p, 2, gens, (2, 1, 2))
    assert is_proper_mat(b)
    for v in _box(b):
        assert mat_decompose(b.evaluate(v), b) == v


def test_verify_matrix_poly_examples():
    rng = random.Random(8)
    p = 10007
    m = [[rng.randint(-5, 5) for _ in range(3)] for _ in range(3)]
    assert verify_matrix_poly(char_poly(m), m, p)
    assert verify_matrix_poly(IntPolynomial((-1, 1)), identity(3), p)
    x = ((1, 2), (3, 4))
    assert not verify_matrix_poly(IntPolynomial((-2, 0, 1)), x, p)
    assert verify_matrix_poly(IntPolynomial((-2, 0, 1)), ((0, 2), (1, 0)), p)


def test_proper_and_isolated():
    b = MatGap(P, 2, (identity(2), ((0, 2), (1, 0))), (20, 20))
    assert is_proper_mat(b) and is_isolated_mat(b, 6)
    # a scalar second generator collides with multiples of the identity
    bad = MatGap(P, 2, (identity(2), ((2, 0), (0, 2))), (2, 2))
    v = is_proper_mat(bad)
    assert not v
    u, w = v.witness
    assert bad.evaluate(u) == bad.evaluate(w) and u != w
    iso = is_isolated_mat(bad, 6)
    assert not iso and iso.witness.coefficients in ((2, -1), (-2, 1))


def test_contains_product_matches_brute_force():
    p = 101
    x2 = ((0, 2), (1, 0))
    b = MatGap(p, 2, (identity(2), x2), (6, 6))
    a = MatGap(p, 2, (identity(2), x2), (1, 1))
    assert contains_product_mat(a, a, b)
    members = {b.evaluate(v) for v in _box(b)}
    assert brute_products(a, a) <= members
    skew = ((1, 1), (0, 1))
    a2 = MatGap(p, 2, (identity(2), skew), (1, 1))
    v = contains_product_mat(a, a2, b)
    assert not (brute_products(a, a2) <= members)
    assert not v
    w = v.witness
    prod = tuple(map(tuple, mat_mul(a.evaluate(w.left_coeffs), a2.evaluate(w.right_coeffs), p)))
    assert prod not in members


def test_json_roundtrip():
    b, _, _, _ = sqrt2_fixture()
    doc = b.to_json()
    assert doc["n"] == 2 and len(doc["generators"][1]) == 4
    assert MatGap.from_json(json.loads(json.dumps(doc))) == b
    schema = json.loads(resources.files("gapkit").joinpath("schemas/instance.schema.json")
                        .read_text())
    jsonschema.validate(doc, {"$ref": "#/$defs/gap", "$defs": schema["$defs"]})


@pytest.mark.parametrize("poly", [(-2, 0), (-1, -1), (-3, 1)])
def test_recover_companion(poly):
    b, a, a2, _ = gen_matrix(P, 2, poly, HALF, QUARTER, HALF, 57, 0)
    rep = recover_matrix_generators(b, a, a2, 1, 1, CFG)
    assert all(rep.verified) and all(rep.conjugation_consistent)
    assert rep.g[0].coefficients == (1, -2, 1)
    assert divides_mod(IntPolynomial(tuple(poly) + (1,)), rep.g[1], P)
    for g, x in zip(rep.g, b.generators):
        assert verify_matrix_poly(g, x, P)


def test_conjugation_consistency_direct():
    b, a, a2, _ = sqrt2_fixture()
    rep = recover_matrix_generators(b, a, a2, 1, 1, CFG)
    yi = a.generators[rep.pivot - 1]
    yi_inv = mat_inverse_mod(yi, P)
    for f, x in zip(rep.f, b.generators):
        sx = tuple(tuple(v * rep.det_T1 % P for v in r) for r in x)
        conj = mat_mul(mat_mul(yi_inv, sx, P), yi, P)
        assert verify_matrix_poly(f, sx, P) == verify_matrix_poly(f, conj, P)


def test_auto_pivot_search():
    b, a, a2, _ = sqrt2_fixture()
    rep = recover_matrix_generators(b, a, a2, config=CFG)
    assert all(rep.verified)
    assert mat_inverse_mod(a.generators[rep.pivot - 1], P) is not None


def test_singular_pivot_not_invertible():
    b, a, a2, _ = sqrt2_fixture()
    sing = ((1, 1), (1, 1))
    a_bad = MatGap(P, 2, (a.generators[0], sing), a.bounds)
    cfg = RecoveryConfig(c=HALF, c_prime=QUARTER, check_hypotheses=False)
    with pytest.raises(NotInvertible):
        recover_matrix_generators(b, a_bad, a2, 2, 1, cfg)


def test_two_sided_containment_checked():
    p = 101
    x2 = ((0, 2), (1, 0))
    skew = ((1, 1), (0, 1))
    b = MatGap(p, 2, (identity(2), x2), (3, 3))
    a = MatGap(p, 2, (identity(2), x2), (1, 1))
    a2 = MatGap(p, 2, (identity(2), skew), (1, 1))
    with pytest.raises(ProductNotContained):
        recover_matrix_generators(b, a, a2, 1, 1)


def test_requires_identity_first():
    g = MatGap(101, 2, (((2, 0), (0, 2)), ((0, 1), (1, 0))), (1, 1))
    with pytest.raises(PreconditionError):
        recover_matrix_generators(g, g, g)


def test_scalar_embedding_matches_field():
    p = 10**8 + 7
    while not (is_prime(p) and pow(2, (p - 1) // 2, p) == 1):
        p += 1
    n = 577
    b, a, a2, _ = gen_general(p, (-2, 0), HALF, QUARTER, HALF, n, 3)
    field = recover_generators(b, a, a2, RecoveryConfig(c=HALF, c_prime=QUARTER, pivot_index=1))
    mb, ma, ma2 = MatGap.from_gap(b), MatGap.from_gap(a), MatGap.from_gap(a2)
    mat = recover_matrix_generators(mb, ma, ma2, 1, 1, CFG)
    assert all(field.verified) and all(mat.verified)
    for gf, gm in zip(field.g, mat.g):
        assert divides_mod(gf, gm, p) and divides_mod(gm, gf, p)


def test_gen_matrix_n1_embeds_field():
    p = 10**9 + 7
    b, a, a2, info = gen_matrix(p, 1, (-2, 0), HALF, QUARTER, HALF, 57, 0)
    fb, fa, fa2, _ = gen_general(p, (-2, 0), HALF, QUARTER, HALF, 57, 0)
    assert b == MatGap.from_gap(fb) and a == MatGap.from_gap(fa)
    assert info["root"] ** 2 % p == 2
