import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from symfer import c2_poisson as c2
from symfer.echelon import available_backends
from symfer.fock import Sector, State, basis_bits
from symfer.vertex import omega, quad

# per-weight quotient dimensions, weights 0..12, from the rank computation
DIMS = {
    1: [1, 0, 1, 3, 1, 3, 1, 0, 1, 0, 0, 0, 0],
    2: [1, 0, 6, 10, 7, 10, 6, 0, 1, 0, 0, 0, 0],
}


def random_even(d, w, rng, n=3):
    pool = basis_bits(d, Sector.UNTWISTED, 2 * w, True)
    picks = rng.sample(pool, min(n, len(pool)))
    return State(d, Sector.UNTWISTED, {b: rng.randint(-3, 3) or 1 for b in picks})


def test_n_d():
    assert [c2.n_d(d) for d in (1, 2, 3, 4)] == [11, 41, 105, 257]


@pytest.mark.parametrize("d", [1, 2])
def test_graded_dims_frozen(d):
    rep = c2.c2_quotient_dims(d, 12)
    assert rep.dims() == DIMS[d]
    assert rep.total == c2.n_d(d)
    assert rep.passed and rep.stable_from == 8


@pytest.mark.parametrize("d", [1, 2])
def test_dims_match_bd_weights(d):
    # the listed spanning set distributes over weights exactly like the quotient
    counts = [0] * 13
    for _, s in c2.BdSet.build(d).elements():
        counts[int(s.weight())] += 1
    assert counts == DIMS[d]


def test_bd_cardinality():
    for d in (1, 2, 3):
        b = c2.BdSet.build(d)
        assert len(b.elements()) == 2 ** (2 * d - 1) + 8 * d * d + 1 == c2.n_d(d)


def test_all_pairs_rows_agree():
    a = c2.c2_quotient_dims(1, 10, generator_set="all_pairs")
    b = c2.c2_quotient_dims(1, 10)
    assert a.dims() == b.dims()
    assert c2.c2_quotient_dims(2, 7, generator_set="all_pairs").dims() == DIMS[2][:8]


def test_symmetry_off_agrees():
    assert c2.c2_quotient_dims(2, 9, use_symmetry=False).dims() == DIMS[2][:10]


@pytest.mark.parametrize("backend", sorted(available_backends()))
def test_backends_agree(backend):
    assert c2.c2_quotient_dims(2, 9, backend=backend).dims() == DIMS[2][:10]


def test_threads_agree():
    assert c2.c2_quotient_dims(2, 9, threads=2).dims() == DIMS[2][:10]


def test_dims_validation():
    with pytest.raises(ValueError):
        c2.c2_quotient_dims(0)


def test_row_cap_marks_truncated():
    rep = c2.c2_quotient_dims(1, 6, row_cap=1)
    assert rep.truncated and not rep.passed
    assert rep.to_report().inconclusive


def test_c2_contains_a_minus2_b():
    rng = random.Random(3)
    ctx = c2.context(1)
    from symfer.vertex import nth_product

    for _ in range(20):
        a = random_even(1, rng.randint(1, 3), rng)
        b = random_even(1, rng.randint(0, 3), rng)
        assert ctx.contains(nth_product(a, -2, b))


def test_residual_is_representative():
    ctx = c2.context(2)
    rng = random.Random(5)
    for _ in range(10):
        s = random_even(2, rng.randint(2, 6), rng)
        r = ctx.residual(s)
        assert ctx.contains(s - r)
        assert ctx.residual(r) == r


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_poisson_product_commutative(seed, wa, wb):
    rng = random.Random(seed)
    a, b = random_even(1, wa, rng), random_even(1, wb, rng)
    assert c2.eq_mod_c2(c2.poisson_product(a, b), c2.poisson_product(b, a))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 2), st.integers(1, 2))
def test_bracket_is_derivation(seed, wa, wb, wc):
    rng = random.Random(seed)
    a, b, c = (random_even(1, w, rng, 2) for w in (wa, wb, wc))
    lhs = c2.poisson_bracket(a, c2.poisson_product(b, c))
    rhs = c2.poisson_product(c2.poisson_bracket(a, b), c) + c2.poisson_product(b, c2.poisson_bracket(a, c))
    assert lhs == rhs


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3))
def test_bracket_skew_mod_c2(seed, wa, wb):
    rng = random.Random(seed)
    a, b = random_even(1, wa, rng), random_even(1, wb, rng)
    assert c2.eq_mod_c2(c2.poisson_bracket(a, b), c2.poisson_bracket(b, a) * -1)


def test_poisson_rejects_odd_and_twisted():
    odd = State.from_modes(1, [(1, -1)])
    with pytest.raises(ValueError):
        c2.poisson_product(odd, odd)
    with pytest.raises(ValueError):
        c2.poisson_product(State.vacuum(1, Sector.TWISTED), State.vacuum(1))


def test_eq_mod_c2_rejects_inhomogeneous():
    with pytest.raises(ValueError):
        c2.eq_mod_c2(omega(1), State.vacuum(1))


def test_power_reduces():
    ctx = c2.context(1)
    p = c2.power(omega(1), 2, ctx)
    assert ctx.residual(p) == p


@pytest.mark.parametrize("d", [1, 2])
def test_bd_basis(d):
    assert c2.verify_bd_basis(d).passed


@pytest.mark.parametrize("d", [1, 2])
def test_bd_drop_control_fails(d):
    rep = c2.verify_bd_basis(d, drop=["e1(-7)f1"])
    assert not rep.passed


@pytest.mark.parametrize("d", [1, 2])
def test_relations(d):
    rep = c2.relation_suite(d)
    assert rep.passed, rep.failures()


def test_efef_coefficient():
    rep = c2.relation_suite(1, "efef")
    assert any(it.name.startswith("efef coefficient") and it.actual == 90 for it in rep.items)


def test_unknown_relation():
    with pytest.raises(ValueError):
        c2.relation_suite(1, "nope")


def test_false_relation_detected():
    # e(-7)f is nonzero modulo C2, so equating it to zero must fail
    assert not c2.eq_mod_c2(quad(1, 1, 7, 2), State.zero(1))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_nilpotency(d):
    rep = c2.nilpotency_degree(d)
    assert rep.passed, rep.failures()
    assert rep.items[0].actual == 5


def test_omega_power_high_d():
    ctx = c2.C2Context(5)
    assert c2.omega_power_identity_high_d(5, ctx=ctx).passed
    # negative control: a wrong coefficient must fail
    assert not c2.omega_power_identity_high_d(5, coefficient=119, ctx=ctx).passed


@pytest.mark.parametrize("d", [1, 2])
def test_omega_central(d):
    assert c2.omega_is_central(d, samples=30)


def test_witness_values():
    assert c2.WITNESS == {1: 1, 2: Fraction(16, 5), 3: Fraction(37, 5), 4: Fraction(72, 5)}
