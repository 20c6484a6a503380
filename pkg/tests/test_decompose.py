import itertools
import random
from fractions import Fraction

import pytest

from gapkit.core_arith import FieldElement, floor_scaled_power
from gapkit.decompose import (CoverWitness, check_epsilon, cover_witness, decompose,
                              decompose_many, decompose_products)
from gapkit.errors import AmbiguousDecomposition, NotContained, OutOfRange, PreconditionError
from gapkit.gap import Gap, is_proper
from gapkit.instances import gen_quadratic


def test_decompose_examples():
    b = Gap(101, (1, 10), (3, 3))
    assert decompose(FieldElement(32, 101), b) == (2, 3)
    assert decompose(50, b) is None
    with pytest.raises(AmbiguousDecomposition) as exc:
        decompose(1, Gap(101, (1, 1), (2, 2)))
    sols = exc.value.solutions
    assert len(sols) == 2 and all(a + b_ == 1 for a, b_ in sols)


def test_decompose_non_strict_returns_first():
    assert decompose(1, Gap(101, (1, 1), (2, 2)), strict=False) in {(1, 0), (0, 1)}


def test_decompose_naive_method():
    b = Gap(101, (1, 10), (3, 3))
    assert decompose(32, b, method="naive") == (2, 3)
    assert decompose(50, b, method="naive") is None
    with pytest.raises(AmbiguousDecomposition):
        decompose(1, Gap(101, (1, 1), (2, 2)), method="naive")
    with pytest.raises(ValueError):
        decompose(1, b, method="lattice")


def test_decompose_with_base_point():
    b = Gap(1009, (1, 31), (4, 3), base_point=500, one_sided=True)
    for coeffs, z in [((c1, c2), b.evaluate((c1, c2))) for c1 in range(4) for c2 in range(3)]:
        assert decompose(z, b) == coeffs


@pytest.mark.parametrize("seed", range(10))
def test_round_trip_small_proper(seed):
    rng = random.Random(seed)
    while True:
        p = rng.choice([1009, 10007, 100003])
        b = Gap(p, tuple(rng.randrange(p) for _ in range(3)), (2, 3, 2))
        if is_proper(b):
            break
    vecs = list(itertools.product(*(range(lo, hi + 1) for lo, hi in b.ranges)))
    zs = [b.evaluate(v) for v in vecs]
    counts, firsts = decompose_many(zs, b)
    assert all(c == 1 for c in counts)
    assert list(firsts) == vecs
    for v, z in zip(vecs[::7], zs[::7]):
        assert decompose(z, b) == v == decompose(z, b, method="naive")


def test_proper_implies_unique_decomposition():
    rng = random.Random(77)
    for _ in range(20):
        b = Gap(211, (rng.randrange(211), rng.randrange(211)), (2, 3))
        if not is_proper(b):
            continue
        for z in range(211):
            try:
                decompose(z, b)
            except AmbiguousDecomposition:
                pytest.fail("proper GAP gave two decompositions")


def test_decompose_products_quadratic():
    p = 10**9 + 7
    b, a = gen_quadratic(p, -2, 0, Fraction(1, 2), 49)
    table = decompose_products(a, a, b)
    t = b.generators[1]
    assert table.entries[0][0] == (1, 0)
    assert table.entries[0][1] == table.entries[1][0] == (0, 1)
    assert table.entries[1][1] == (2, 0)
    for i, y in enumerate(a.generators):
        for j, y2 in enumerate(a.generators):
            assert b.evaluate(table.entries[i][j]) == y * y2 % p
    assert table.bound_observed == 2
    assert table.to_json()[1][1] == ["2", "0"]
    assert t * t % p == 2


def test_decompose_products_preconditions():
    b = Gap(101, (1, 10), (3, 3))
    with pytest.raises(PreconditionError):
        decompose_products(Gap(101, (0, 0), (1, 1)), Gap(101, (0, 0), (1, 1)), b)
    with pytest.raises(PreconditionError):
        decompose_products(Gap(103, (1, 2), (1, 1)), Gap(101, (1, 2), (1, 1)), b)
    with pytest.raises(PreconditionError):
        decompose_products(Gap(101, (1,), (1,)), Gap(101, (1,), (1,)), b)


def test_decompose_products_random_not_contained():
    p = 1000003
    t = 77777
    b = Gap(p, (1, t), (30, 30))
    with pytest.raises(NotContained) as exc:
        decompose_products(b, b, b)
    assert exc.value.witness == (2, 2)


def test_cover_examples():
    assert cover_witness(47, 1, 1, 100, Fraction(1, 2)).as_tuple() == (4, 10, 7, 1)
    assert cover_witness(0, 1, 1, 100, Fraction(1, 2)).as_tuple() == (0, 0, 0, 0)
    assert cover_witness(-47, 1, 1, 100, Fraction(1, 2)).as_tuple() == (-4, 10, -7, 1)


def test_cover_out_of_range():
    with pytest.raises(OutOfRange):
        cover_witness(51, 1, 1, 100, Fraction(1, 2))
    with pytest.raises(OutOfRange):
        cover_witness(3, Fraction(1, 10), Fraction(1, 10), 100, Fraction(1, 2))


def test_cover_large_remainder_uses_swapped_factors():
    # u_max = 8 and b = 512, so the remainder 511 must sit in the v slot
    n, eps = 4096, Fraction(3, 4)
    w = cover_witness(2047, 1, 1, n, eps)
    assert w.verify(1, 1, n, eps)
    assert w.mu_factors == (1, 511)
    assert w.lambda_factors[0] * w.lambda_factors[1] + w.mu_factors[0] * w.mu_factors[1] == 2047


@pytest.mark.parametrize("n", [100, 400, 2500])
def test_cover_completeness(n):
    for w in range(-(n // 2), n // 2 + 1):
        cw = cover_witness(w, 1, 1, n, Fraction(1, 2))
        assert cw.verify(1, 1, n, Fraction(1, 2)), w


def test_cover_verify_rejects_bad_witness():
    assert not CoverWitness((5, 10), (0, 0), 47).verify(1, 1, 100, Fraction(1, 2))
    assert not CoverWitness((47, 1), (0, 0), 47).verify(1, 1, 100, Fraction(1, 2))


def test_epsilon_validation():
    assert check_epsilon("3/8") == Fraction(3, 8)
    for bad in ("1/9", 0, 1, "3/2"):
        with pytest.raises(ValueError):
            check_epsilon(bad)


def test_scaled_power_floors():
    assert floor_scaled_power(1, 2500, Fraction(1, 2)) == 50
    assert floor_scaled_power(Fraction(1, 2), 4096, Fraction(1, 4)) == 4
