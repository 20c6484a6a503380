import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from gapkit.core_arith import FieldElement, IntPolynomial, eval_poly_mod
from gapkit.errors import CapExceeded
from gapkit.oracles import minpoly_bounded, mult_energy


def brute_energy(s, p):
    vals = sorted({v % p for v in s})
    return sum(1 for a, b, c, d in itertools.product(vals, repeat=4) if a * b % p == c * d % p)


def brute_minpolys(t, p, d, h):
    out = []
    for vec in itertools.product(range(-h, h + 1), repeat=d + 1):
        if not any(vec):
            continue
        lead = next(c for c in reversed(vec) if c)
        if lead < 0 or math.gcd(*vec) != 1:
            continue
        if sum(c * pow(t, k, p) for k, c in enumerate(vec)) % p == 0:
            out.append(IntPolynomial(vec).coefficients)
    return sorted(out)


def test_minpoly_examples():
    res = minpoly_bounded(FieldElement(3, 7), 2, 2)
    assert IntPolynomial((-2, 0, 1)) in res
    assert sorted(f.coefficients for f in res.polynomials) == brute_minpolys(3, 7, 2, 2)
    for p in (7, 101, 10**9 + 7):
        assert minpoly_bounded(FieldElement(1, p), 1, 1).minimal.coefficients == (-1, 1)


def test_minpoly_random_large_p_mostly_empty():
    rng = random.Random(3)
    p = 10**9 + 7
    empties = sum(not minpoly_bounded(FieldElement(rng.randrange(p), p), 2, 10).polynomials
                  for _ in range(20))
    # each failure has probability about 21^3 / p
    assert empties >= 19


@pytest.mark.parametrize("seed", range(15))
def test_minpoly_matches_brute_force(seed):
    rng = random.Random(seed)
    p = rng.choice([7, 11, 31, 101])
    t = rng.randrange(p)
    d, h = rng.choice([(1, 3), (2, 2), (3, 1)])
    res = minpoly_bounded(FieldElement(t, p), d, h)
    assert sorted(f.coefficients for f in res.polynomials) == brute_minpolys(t, p, d, h)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([101, 1009, 10007]))
def test_minpoly_listing_invariants(v, p):
    t = FieldElement(v, p)
    res = minpoly_bounded(t, 2, 3)
    seen = set()
    for f in res.polynomials:
        assert eval_poly_mod(f, t).value == 0
        assert f.leading > 0 and math.gcd(*f.coefficients) == 1
        # associates over Z are +-f; the sign rule keeps just one
        key = f.coefficients
        neg = tuple(-c for c in key)
        assert key not in seen and neg not in seen
        seen.add(key)
    if res.polynomials:
        keys = [(f.degree, f.height, f.coefficients) for f in res.polynomials]
        assert keys == sorted(keys) and res.minimal == res.polynomials[0]
    else:
        assert res.minimal is None


def test_minpoly_json_and_errors():
    res = minpoly_bounded(FieldElement(3, 7), 1, 1)
    assert res.to_json() == [[str(c) for c in f.coefficients] for f in res.polynomials]
    with pytest.raises(CapExceeded):
        minpoly_bounded(FieldElement(3, 10**9 + 7), 4, 100, cap=10**6)
    with pytest.raises(ValueError):
        minpoly_bounded(FieldElement(3, 7), 0, 1)


def test_energy_examples():
    p = 10**9 + 7
    assert mult_energy([FieldElement(5, p)]) == 1
    assert mult_energy([1, 2], p) == 6
    g = 12345
    assert mult_energy([1, g, g * g % p], p) == 19


@pytest.mark.parametrize("seed", range(20))
def test_energy_matches_brute_force(seed):
    rng = random.Random(seed)
    p = rng.choice([101, 10007, 10**9 + 7, 2**61 - 1])
    s = {rng.randrange(1, p) for _ in range(rng.randint(1, 25))}
    e = mult_energy(s, p)
    assert e == brute_energy(s, p)
    assert len(s) ** 2 <= e <= len(s) ** 3


def test_energy_interval_growth():
    p = 10**9 + 7
    ratios = []
    for k in range(6, 11):
        n = 2**k
        ratios.append(mult_energy(range(1, n + 1), p) / n**2)
        assert ratios[-1] <= 12 * k
    assert ratios == sorted(ratios)


def test_energy_errors():
    with pytest.raises(ValueError):
        mult_energy([1, 2])
    with pytest.raises(CapExceeded):
        mult_energy(range(1, 200), 10007, cap=1000)
