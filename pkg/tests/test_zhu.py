import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from symfer import zhu
from symfer.c2_poisson import n_d
from symfer.exact_linalg import MatrixQ, min_poly, poly_from_roots
from symfer.fock import Sector, State, basis_bits
from symfer.vertex import nth_product, omega, sp_basis, translation, virasoro


def random_even(d, w, rng, n=3):
    pool = basis_bits(d, Sector.UNTWISTED, 2 * w, True)
    picks = rng.sample(pool, min(n, len(pool)))
    return State(d, Sector.UNTWISTED, {b: rng.randint(-3, 3) or 1 for b in picks})


@pytest.fixture(scope="module")
def ctx1():
    return zhu.ZhuContext(1, 8)


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def test_vacuum_is_unit():
    rng = random.Random(1)
    one = State.vacuum(1)
    for w in range(0, 5):
        b = random_even(1, w, rng)
        assert zhu.zhu_star(one, b) == b


def test_omega_star_expansion():
    w = omega(2)
    want = nth_product(w, -1, w) + nth_product(w, 0, w) * 2 + nth_product(w, 1, w)
    assert zhu.zhu_star(w, w) == want


def test_star_with_omega_is_l_minus2_plus_l_minus1():
    # omega * b = (L(-2) + 2L(-1) + L(0)) b for any homogeneous b
    rng = random.Random(2)
    w = omega(1)
    for wt in range(0, 4):
        b = random_even(1, wt, rng)
        want = virasoro(-2, b) + virasoro(-1, b) * 2 + virasoro(0, b)
        assert zhu.zhu_star(w, b) == want


def test_circ_is_circ_n_zero():
    w = omega(1)
    b = State.vacuum(1)
    assert zhu.zhu_circ(w, b) == zhu.zhu_circ_n(w, 0, b)


def test_zhu_star_needs_homogeneous_left_factor():
    with pytest.raises(ValueError):
        zhu.zhu_star(omega(1) + State.vacuum(1), State.vacuum(1))
    # the bilinear extension accepts it
    s = zhu.star(omega(1) + State.vacuum(1), State.vacuum(1))
    assert s == omega(1) + State.vacuum(1)


def test_star_power():
    w = omega(1)
    assert zhu.star_power(w, 0) == State.vacuum(1)
    assert zhu.star_power(w, 2) == zhu.zhu_star(w, w)


# ---------------------------------------------------------------------------
# top-component tables
# ---------------------------------------------------------------------------

def test_module_aliases():
    assert zhu.canonical_module("SFθ_plus") == "SFtheta_plus"
    with pytest.raises(ValueError):
        zhu.canonical_module("SF_nope")


@pytest.mark.parametrize("d", [1, 2, 3])
def test_theta_plus_scalar(d):
    blk = zhu.build_rep_block(d, "SFθ_plus")
    for i in range(1, d + 1):
        assert blk.matrix(("h", i, i)) == MatrixQ.from_dense([[Fraction(-1, 8)]])
    assert blk.omega_matrix == MatrixQ.from_dense([[Fraction(-d, 8)]])


def test_sf_minus_h12():
    blk = zhu.build_rep_block(2, "SF_minus")
    h12 = blk.matrix(("h", 1, 2))
    # columns are inputs: o(h12) e2 = e1, o(h12) e1 = 0
    assert blk.labels[:2] == ["e1", "e2"]
    assert h12[0, 1] == 1
    assert all(h12[r, 0] == 0 for r in range(blk.dim))


def test_sf_minus_omega_is_identity():
    blk = zhu.build_rep_block(3, "SF_minus")
    assert blk.omega_matrix == MatrixQ.identity(6)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_hat_block_nilpotency(d):
    m = zhu.build_rep_block(d, "SFhat_plus").omega_matrix
    assert zhu._nilpotency(m) == d + 1


def test_grassmann_basis_sorted():
    b = zhu.grassmann_basis(2)
    assert list(b) == sorted(b) and b[0] == 0 and len(b) == 8
    assert all(x.bit_count() % 2 == 0 for x in b)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("module", zhu.UNTWISTED_MODULES)
def test_oracle_matches_tables(d, module):
    rep = zhu.oracle_rep_check(d, module)
    assert rep.passed, rep.notes


def test_twisted_tops_unavailable():
    with pytest.raises(NotImplementedError):
        zhu.top_states(1, "SFtheta_minus")


def test_min_polys_per_block():
    d = 2
    for blk, (name, want) in zip((zhu.build_rep_block(d, m) for m in zhu.STACK_ORDER), zhu.expected_factors(d)):
        assert blk.module_id == name
        assert min_poly(blk.omega_matrix) == want


# ---------------------------------------------------------------------------
# zero modes are a representation of the Zhu product
# ---------------------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3), st.integers(0, 3), st.sampled_from(zhu.UNTWISTED_MODULES))
def test_zero_mode_multiplicative(seed, wa, wb, module):
    rng = random.Random(seed)
    a, b = random_even(1, wa, rng), random_even(1, wb, rng)
    tops = zhu.top_states(1, module)
    lhs = zhu.zero_mode_matrix(zhu.star(a, b), tops)
    assert lhs == zhu.zero_mode_matrix(a, tops) @ zhu.zero_mode_matrix(b, tops)


@pytest.mark.parametrize("module", zhu.UNTWISTED_MODULES)
def test_zero_mode_multiplicative_d2(module):
    rng = random.Random(11)
    tops = zhu.top_states(2, module)
    for _ in range(4):
        a, b = random_even(2, rng.randint(1, 3), rng), random_even(2, rng.randint(0, 2), rng)
        lhs = zhu.zero_mode_matrix(zhu.star(a, b), tops)
        assert lhs == zhu.zero_mode_matrix(a, tops) @ zhu.zero_mode_matrix(b, tops)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(0, 3), st.integers(0, 2))
def test_o_rows_vanish_on_tops(seed, wa, wb, n):
    rng = random.Random(seed)
    a, b = random_even(1, wa, rng), random_even(1, wb, rng)
    r = zhu.zhu_circ_n(a, n, b)
    for m in zhu.UNTWISTED_MODULES:
        tops = zhu.top_states(1, m)
        assert zhu.zero_mode_matrix(r, tops).is_zero()


def test_residual_keeps_zero_mode(ctx1):
    rng = random.Random(4)
    for _ in range(6):
        a, b = random_even(1, rng.randint(1, 3), rng), random_even(1, rng.randint(0, 3), rng)
        g = zhu.star(a, b)
        r = ctx1.residual(g)
        assert ctx1.contains(g - r)
        for m in zhu.UNTWISTED_MODULES:
            tops = zhu.top_states(1, m)
            assert zhu.zero_mode_matrix(r, tops) == zhu.zero_mode_matrix(a, tops) @ zhu.zero_mode_matrix(b, tops)


# ---------------------------------------------------------------------------
# truncated O(V)
# ---------------------------------------------------------------------------

def test_omega_circ_one_in_O():
    ctx = zhu.ZhuContext(1, 6)
    assert ctx.contains(zhu.zhu_circ(omega(1), State.vacuum(1)))
    assert not ctx.contains(omega(1))


def test_translation_in_O(ctx1):
    rng = random.Random(7)
    for _ in range(10):
        a = random_even(1, rng.randint(2, 6), rng)
        assert zhu.translation_in_O(ctx1, a)
        assert ctx1.contains(translation(a) + a * a.weight())


def test_residual_rejects_over_cap(ctx1):
    with pytest.raises(ValueError):
        ctx1.residual(State.from_modes(1, [(1, -9), (2, -1)]))


def test_direct_quotients_monotone():
    t = zhu.direct_zhu_dim(1, 12)
    q = t.quotient
    assert all(x <= y for x, y in zip(q, q[1:]))
    assert max(q) <= n_d(1)
    assert t.stabilized and t.dim == 11 and t.passed


def test_direct_all_pairs_agree():
    a = zhu.direct_zhu_dim(1, 8, generator_set="all_pairs")
    b = zhu.direct_zhu_dim(1, 8)
    assert a.quotient == b.quotient


def test_direct_symmetry_off_agrees():
    a = zhu.direct_zhu_dim(2, 7, use_symmetry=False)
    b = zhu.direct_zhu_dim(2, 7)
    assert a.quotient == b.quotient == [1, 1, 7, 17, 24, 34, 40, 40]


def test_short_window_is_inconclusive():
    t = zhu.direct_zhu_dim(2, 6)
    assert not t.stabilized and t.dim is None
    assert t.to_report().exit_code() == 3


def test_unknown_generator_set():
    with pytest.raises(ValueError):
        list(zhu.zhu_row_sources(1, 4, (0,), "nope"))


# ---------------------------------------------------------------------------
# the algebra A_d
# ---------------------------------------------------------------------------

def test_center_elements_commute():
    A = zhu.build_Ad(1)
    k, elems = zhu.center_dim(A)
    assert k == 5
    for z in elems:
        for g in A.gens.values():
            assert z.commutator(g).is_zero()


def test_functionals_on_full_matrix_algebra():
    units = [MatrixQ.from_dense([[int(r == i and c == j) for c in range(2)] for r in range(2)])
             for i in range(2) for j in range(2)]
    assert zhu.functionals_dim(units, units) == 1


def test_coprimality_fails_at_d4():
    rep = zhu.coprimality_check(4)
    bad = [it.name for it in rep.failures()]
    # root 1/2 - d/8 of the theta-minus block is 0 at d = 4, so the lcm also drops a degree
    assert bad == ["gcd(SFhat_plus, SFtheta_minus)", "stacked omega min poly"]


def test_expected_min_poly_degree():
    for d in (1, 2, 3):
        assert len(zhu.expected_min_poly(d)) == d + 5


def test_sp_derivations_fix_omega():
    A = zhu.build_Ad(2)
    for x in sp_basis(2):
        assert zhu.sp_derivation_matrix(2, x).commutator(A.omega).is_zero()


# ---------------------------------------------------------------------------
# the weight-four identity
# ---------------------------------------------------------------------------

def test_j4_state_matches_vertex_definition():
    from symfer.vertex import J4

    assert zhu.j4_state(2) == J4(2)


def test_j4_stated_coefficients_mismatch():
    rep = zhu.verify_j4(2)
    assert not rep.passed


def test_j4_corrected_polynomial():
    rep = zhu.verify_j4(2, zhu.J4_COEFFS_MOD_O)
    assert rep.passed
    assert "twisted blocks not independently verified" in rep.notes


def test_j4_negative_control():
    bad = dict(zhu.J4_COEFFS_MOD_O)
    bad[5] = Fraction(30)
    assert not zhu.verify_j4(2, bad).passed


def test_j4_on_tops_directly():
    J = zhu.j4_state(2)
    assert zhu.zero_mode_matrix(J, zhu.top_states(2, "SF_minus")) == MatrixQ.identity(4).scale(3)
    hat = zhu.build_rep_block(2, "SFhat_plus")
    assert zhu.zero_mode_matrix(J, zhu.top_states(2, "SFhat_plus")) == hat.omega_matrix.scale(2)


def test_j4_requires_d2():
    with pytest.raises(ValueError):
        zhu.verify_j4(1)


def test_j4_fit_mod_O(zhu_ctx_d2):
    assert zhu.j4_polynomial_mod_O(zhu_ctx_d2) == zhu.J4_COEFFS_MOD_O
    assert zhu.j4_membership(zhu_ctx_d2, zhu.J4_COEFFS_MOD_O)
    assert not zhu.j4_membership(zhu_ctx_d2)


# ---------------------------------------------------------------------------
# exact CSV
# ---------------------------------------------------------------------------

fracs = st.fractions(min_value=-9, max_value=9, max_denominator=9)


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(fracs, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_csv_round_trip(rows):
    m = MatrixQ.from_dense(rows)
    text = zhu.matrix_csv(m)
    assert all("/" in x for x in text.split())
    assert zhu.parse_matrix_csv(text) == m


def test_poly_from_roots_factor():
    assert zhu.expected_factors(1)[0][1] == poly_from_roots([0, 0])
