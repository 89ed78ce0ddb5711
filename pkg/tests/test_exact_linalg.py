from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from symfer.exact_linalg import (
    MatrixQ,
    TrackedBasis,
    algebra_closure,
    kernel,
    min_poly,
    poly_divmod,
    poly_eval_matrix,
    poly_from_roots,
    poly_gcd,
    poly_mul,
    poly_str,
    rank,
    rref,
    span_contains,
)

small_ints = st.integers(min_value=-4, max_value=4)


def dense(rows, cols):
    return st.lists(st.lists(small_ints, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@st.composite
def matrices(draw, max_n=5):
    r = draw(st.integers(1, max_n))
    c = draw(st.integers(1, max_n))
    return MatrixQ.from_dense(draw(dense(r, c)))


@st.composite
def square(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    return MatrixQ.from_dense(draw(dense(n, n)))


def test_identity_and_zero():
    assert MatrixQ.identity(3) @ MatrixQ.identity(3) == MatrixQ.identity(3)
    assert MatrixQ.zeros(2, 3).is_zero()
    assert rank(MatrixQ.identity(4)) == 4


def test_rref_known():
    m = MatrixQ.from_dense([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    r, piv, red = rref(m)
    assert r == 2 and piv == [0, 1]
    assert red.to_dense()[0] == [1, 0, 1]
    assert red.to_dense()[1] == [0, 1, 1]


def test_stored_zero_rejected():
    with pytest.raises(ValueError):
        MatrixQ(1, 1, ({0: Fraction(0)},))


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_nullity(m):
    ker = kernel(m)
    assert rank(m) + len(ker) == m.cols
    for v in ker:
        assert not m.apply(v)


@given(matrices())
@settings(max_examples=40, deadline=None)
def test_rows_lie_in_own_span(m):
    for row in m.data:
        assert span_contains(m, row)


@given(matrices(), matrices())
@settings(max_examples=40, deadline=None)
def test_transpose_of_product(a, b):
    if a.cols != b.rows:
        b = b.transpose() if a.cols == b.cols else MatrixQ.identity(a.cols)
    assert (a @ b).transpose() == b.transpose() @ a.transpose()


@given(square())
@settings(max_examples=50, deadline=None)
def test_min_poly_annihilates(m):
    p = min_poly(m)
    assert p[-1] == 1
    assert poly_eval_matrix(p, m).is_zero()
    # minimality: no proper monic divisor of smaller degree annihilates m
    assert len(p) - 1 <= m.rows


def test_min_poly_diagonal():
    m = MatrixQ.from_dense([[2, 0, 0], [0, 2, 0], [0, 0, Fraction(-1, 8)]])
    assert min_poly(m) == poly_from_roots([2, Fraction(-1, 8)])


def test_min_poly_nilpotent_jordan():
    m = MatrixQ.from_dense([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    assert min_poly(m) == [0, 0, 0, 1]


fracs = st.fractions(min_value=-5, max_value=5, max_denominator=5)


@given(st.lists(fracs, min_size=1, max_size=4), st.lists(fracs, min_size=1, max_size=4))
@settings(max_examples=50, deadline=None)
def test_poly_divmod_identity(p, q):
    if not any(q):
        return
    quo, rem = poly_divmod(p, q)
    back = poly_mul(quo, q)
    n = max(len(back), len(rem), len(p))
    pad = lambda x: list(x) + [0] * (n - len(x))
    assert [a + b for a, b in zip(pad(back), pad(rem))] == pad([Fraction(c) for c in p])


def test_gcd_of_coprime_linear_factors():
    assert poly_gcd(poly_from_roots([1]), poly_from_roots([0, 0])) == [1]
    assert poly_gcd(poly_from_roots([1, 2]), poly_from_roots([2, 3])) == poly_from_roots([2])


def test_poly_str():
    assert poly_str(poly_from_roots([1, Fraction(-1, 8)])) == "x^2-7/8*x-1/8"


def test_tracked_basis_relation():
    tb = TrackedBasis()
    assert tb.add({0: 1}) is None
    assert tb.add({1: 1}) is None
    rel = tb.add({0: 2, 1: -3})
    assert rel == {2: 1, 0: -2, 1: 3}


def unit(n, i, j):
    return MatrixQ.from_rows([{j: 1} if r == i else {} for r in range(n)], n)


def test_closure_full_matrix_algebra():
    n = 3
    gens = [unit(n, 0, 1), unit(n, 1, 2), unit(n, 2, 0)]
    assert algebra_closure(gens, MatrixQ.identity(n)).dim == n * n


def test_closure_block_diagonal_counts():
    a = MatrixQ.block_diag([unit(2, 0, 1), MatrixQ.zeros(1)])
    b = MatrixQ.block_diag([unit(2, 1, 0), MatrixQ.zeros(1)])
    # M_2 plus the separate unit of the 1x1 block
    assert algebra_closure([a, b], MatrixQ.identity(3)).dim == 5


def test_unvectorize_round_trip():
    m = MatrixQ.from_dense([[1, Fraction(1, 2)], [0, -3]])
    assert MatrixQ.unvectorize(m.vectorize(), 2, 2) == m


def test_power_matches_repeated_product():
    m = MatrixQ.from_dense([[1, 1], [0, 1]])
    assert m.power(5) == MatrixQ.from_dense([[1, 5], [0, 1]])
