import json
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from gapkit.core_arith import FieldElement, IntPolynomial, eval_poly_mod, iroot, is_prime
from gapkit.errors import NoRoot, PreconditionError
from gapkit.gap import contains_product, is_isolated, is_proper
from gapkit.instances import (Instance, InstanceSpec, gen_degenerate, gen_quadratic, gen_random,
                              generate, guards_hold, quadratic_batch, rank2_bound, roots_mod)
from gapkit.matrix_ring import MatGap
from gapkit.oracles import minpoly_bounded
from gapkit.rng import SplitMix64


def instance_schema():
    return json.loads(resources.files("gapkit").joinpath("schemas/instance.schema.json")
                      .read_text())


def test_splitmix_reference_vectors():
    # published SplitMix64 outputs for seed 0
    rng = SplitMix64(0)
    assert [rng.next64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
                                                 0x06C45D188009454F]


def test_splitmix_streams_and_ranges():
    a, b = SplitMix64(42, 1), SplitMix64(42, 2)
    assert a.next64() != b.next64()
    rng = SplitMix64(5)
    draws = [rng.randint(-3, 3) for _ in range(2000)]
    assert set(draws) == set(range(-3, 4))
    with pytest.raises(ValueError):
        rng.randbelow(0)


def test_quadratic_examples():
    assert roots_mod((-2, 0), 7) == [3, 4]
    b, a = gen_quadratic(7, -2, 0, Fraction(1, 2), 4)
    assert b.generators == (1, 3)
    p = 10**9 + 9
    assert pow(5, (p - 1) // 2, p) == 1
    b, _ = gen_quadratic(p, -1, -1, Fraction(1, 2), 100)
    t = b.generators[1]
    assert (t * t - t - 1) % p == 0
    with pytest.raises(NoRoot):
        gen_quadratic(1000003, -2, 0, Fraction(1, 2), 40)


@pytest.mark.parametrize("seed", range(8))
def test_quadratic_fixture_flags(seed):
    inst = quadratic_batch(seed, 1, 10**5, 10**7)[0]
    p = inst.spec.p
    c0, c1 = inst.spec.poly
    t = FieldElement(inst.b.generators[1], p)
    assert eval_poly_mod(IntPolynomial((c0, c1, 1)), t).value == 0
    assert guards_hold(p, inst.spec.n_bound)
    assert not guards_hold(p, inst.spec.n_bound + 1)
    assert is_isolated(inst.b, 6)
    members = inst.b.elements()
    brute = all(x * y % p in members for x in inst.a.elements() for y in inst.a.elements())
    assert bool(contains_product(inst.a, inst.a, inst.b)) == brute
    # (a + bt)(a' + b't) has coefficients bounded by (1 + |c0|) M^2 and (2 + |c1|) M^2
    m, n = inst.a.bounds[0], inst.spec.n_bound
    if max(1 + abs(c0), 2 + abs(c1)) * m * m <= n:
        assert brute


def test_rank2_bound():
    for p in (10**5 + 3, 10**9 + 7):
        n = rank2_bound(p)
        assert (2 * n + 1) ** 3 <= p < (2 * n + 3) ** 3


def test_degenerate_fixture():
    p = 10**9 + 7
    b, a = gen_degenerate(p, 1000)
    assert is_proper(b)
    v = is_isolated(b, 6)
    assert not v and v.witness.coefficients == (-1000, 1)
    b, a = gen_degenerate(p, 50)
    prods = {x * y % p for x in a.elements() for y in a.elements()}
    assert prods <= b.elements() == set(range(2500))
    with pytest.raises(PreconditionError):
        gen_degenerate(101, 11)


def test_degenerate_generator_not_algebraic():
    rng = SplitMix64(19)
    p = 10**9 + 7
    for _ in range(20):
        n = iroot(p, 4) - 20 + rng.randbelow(41)
        assert not minpoly_bounded(FieldElement(n, p), 2, 10).polynomials


def test_random_fixture():
    p = 10**9 + 7
    assert gen_random(p, 3, 50, 9) == gen_random(p, 3, 50, 9)
    assert gen_random(p, 3, 50, 9) != gen_random(p, 3, 50, 10)
    b = gen_random(p, 2, 200, 4)
    assert b.generators[0] == 1 and is_isolated(b, 6)


@pytest.mark.parametrize("kind,extra", [
    ("quadratic", {}),
    ("general_algebraic", {"c_prime": Fraction(1, 4)}),
    ("degenerate", {"n_bound": 60}),
    ("random", {"n_bound": 60}),
    ("matrix", {"n": 2, "p": 1000003, "c_prime": Fraction(1, 4)}),
])
def test_generate_roundtrip(kind, extra):
    spec = InstanceSpec(**{"kind": kind, "p": 10**8 + 7, "rng_seed": 3, **extra})
    inst = generate(spec)
    doc = json.loads(json.dumps(inst.to_json()))
    jsonschema.validate(doc, instance_schema())
    back = Instance.from_json(doc)
    assert back.to_json() == inst.to_json()
    assert back.spec.kind == kind and back.spec.n_bound is not None
    assert generate(spec).to_json() == inst.to_json()
    if kind == "degenerate":
        assert inst.flags == {"B_proper": True, "B_isolated": False, "contained": True}
    elif kind in ("quadratic", "general_algebraic", "matrix"):
        # the rank-two size guard is informational for other shapes
        assert all(v for k, v in inst.flags.items() if k != "guards"), inst.flags


def test_matrix_spec_n1_is_scalar_embedding():
    spec = InstanceSpec("matrix", 10**8 + 7, c_prime=Fraction(1, 4), rng_seed=1, n=1)
    inst = generate(spec)
    assert inst.is_matrix and inst.b.dimension == 1
    twin = generate(InstanceSpec("general_algebraic", 10**8 + 7, c_prime=Fraction(1, 4),
                                 rng_seed=1, poly=inst.spec.poly))
    assert inst.b == MatGap.from_gap(twin.b) and inst.a == MatGap.from_gap(twin.a)


def test_spec_validation():
    with pytest.raises(ValueError):
        InstanceSpec("cubic", 101)
    with pytest.raises(ValueError):
        InstanceSpec("quadratic", 101, epsilon=Fraction(1, 9))
    with pytest.raises(ValueError):
        InstanceSpec("quadratic", 101, c=1)
    with pytest.raises(ValueError):
        InstanceSpec("quadratic", 100)
    with pytest.raises(ValueError):
        InstanceSpec("quadratic", 101, poly=(1, 2, 3))


def test_batch_deterministic():
    first = [i.to_json() for i in quadratic_batch(7, 5)]
    assert first == [i.to_json() for i in quadratic_batch(7, 5)]
    assert all(is_prime(int(d["spec"]["p"])) for d in first)
    assert all(10**5 <= int(d["spec"]["p"]) <= 10**9 for d in first)
