"""Acceptance criteria, exact tolerance. One summary line per criterion is
printed at the end of the run (see conftest.py)."""

from fractions import Fraction

import pytest

from conftest import record
from symfer import c2_poisson as c2
from symfer import vertex, zhu
from symfer.cli import main
from symfer.exact_linalg import poly_from_roots, poly_mul
from symfer.fock import Sector, basis_bits


def product_series(d, n):
    """Coefficients of prod_{k>=1} (1 + q^k)^(2d) up to q^n."""
    c = [1] + [0] * n
    for k in range(1, n + 1):
        for _ in range(2 * d):
            for w in range(n, k - 1, -1):
                c[w] += c[w - k]
    return c


def check(criterion, case, ok):
    record(criterion, case, "pass" if ok else "fail")
    assert ok, f"criterion {criterion} failed at {case}"


# 1 -------------------------------------------------------------------------

@pytest.mark.parametrize("d,total", [(1, 11), (2, 41), (3, 105), (4, 257)])
def test_c1_c2_quotient_totals(d, total):
    rep = c2.c2_quotient_dims(d, 12)
    lim = max(8, 2 * d)
    ok = (not rep.truncated and rep.total == total
          and all(r.quotient_dim == 0 for r in rep.per_weight if r.weight > lim))
    check(1, f"d={d}", ok)


# 2 -------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_c2_bd_basis(d):
    full = c2.verify_bd_basis(d)
    control = c2.verify_bd_basis(d, drop=["e1(-7)f1"])
    check(2, f"d={d}", full.passed and not control.passed)


# 3 -------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_c3_relations(d):
    rep = c2.relation_suite(d, max_mode=6)
    check(3, f"d={d}", rep.passed and len(rep.items) > 0)


# 4 -------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_c4_nilpotency(d):
    rep = c2.nilpotency_degree(d)
    check(4, f"d={d}", rep.passed and rep.items[0].actual == 5)


def test_c4_omega_power_d5():
    ctx = c2.C2Context(5)
    ok = c2.omega_power_identity_high_d(5, ctx=ctx).passed
    ok = ok and not c2.omega_power_identity_high_d(5, coefficient=119, ctx=ctx).passed
    check(4, "d=5", ok)


# 5 -------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_c5_zhu_image(d):
    A = zhu.build_Ad(d, strict=False)
    q = Fraction(d, 8)
    want = poly_mul(poly_mul(poly_from_roots([0] * (d + 1)), poly_from_roots([1])),
                    poly_mul(poly_from_roots([-q]), poly_from_roots([Fraction(1, 2) - q])))
    cop = zhu.coprimality_check(d, A)
    check(5, f"d={d}", A.dim == c2.n_d(d) and zhu.expected_min_poly(d) == want and cop.passed)


# 6 -------------------------------------------------------------------------

@pytest.mark.parametrize("d,expected", [(1, 5), (2, 11), (3, 35)])
def test_c6_center_and_functionals(d, expected):
    A = zhu.build_Ad(d)
    check(6, f"d={d}", zhu.center_dim(A)[0] == expected and zhu.symmetric_functionals_dim(A) == expected)


# 7 -------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_c7_sp_invariants(d):
    inv = zhu.sp_invariants_dim(d)
    ok = inv.dim == d + 4 and inv.per_degree == {2 * k: 1 for k in range(d + 1)} and inv.in_omega_span
    check(7, f"d={d}", ok)


# 8 -------------------------------------------------------------------------

@pytest.mark.xfail(strict=True, reason="stated coefficients disagree with the zero-mode action; "
                                       "the linear term 2 omega is missing")
def test_c8_j4_stated_identity():
    ok = zhu.verify_j4(2, zhu.J4_COEFFS).passed
    record(8, "stated", "pass" if ok else "xfail")
    assert ok


def test_c8_j4_corrected_identity(zhu_ctx_d2):
    ok = zhu.verify_j4(2, zhu.J4_COEFFS_MOD_O).passed
    ok = ok and zhu.j4_membership(zhu_ctx_d2, zhu.J4_COEFFS_MOD_O)
    check(8, "corrected", ok)


# 9 -------------------------------------------------------------------------

def test_c9_direct_d1():
    t = zhu.direct_zhu_dim(1, 12)
    check(9, "d=1 cap=12", t.stabilized and t.dim == 11)


def test_c9_direct_d2_cap12(zhu_ctx_d2):
    t = zhu.direct_zhu_dim(2, 12, ctx=zhu_ctx_d2)
    check(9, "d=2 cap=12", t.stabilized and t.dim == 41)


@pytest.mark.slow
def test_c9_direct_d2_cap14():
    t = zhu.direct_zhu_dim(2, 14)
    check(9, "d=2 cap=14", t.stabilized and t.dim == 41)


def test_c9_unstabilized_exits_3(capsys):
    code = main(["zhu", "--d", "2", "--method", "direct", "--cap", "6"])
    capsys.readouterr()
    check(9, "d=2 cap=6 exit", code == 3)


# 10 ------------------------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 3])
def test_c10_virasoro(d):
    check(10, f"virasoro d={d}", vertex.virasoro_closure_check(d, max_weight=6).passed)


@pytest.mark.parametrize("d", [1, pytest.param(2, marks=pytest.mark.slow)])
def test_c10_commutator(d):
    check(10, f"commutator d={d}", vertex.commutator_formula_check(d).passed)


@pytest.mark.parametrize("d", [1, 2])
def test_c10_skew_symmetry(d):
    check(10, f"skew d={d}", vertex.skew_symmetry_check(d).passed)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_c10_oracle_reps(d):
    ok = all(zhu.oracle_rep_check(d, m).passed for m in zhu.UNTWISTED_MODULES)
    check(10, f"oracle d={d}", ok)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_c10_basis_counts(d):
    series = product_series(d, 12)
    counts = [len(basis_bits(d, Sector.UNTWISTED, 2 * w, False)) for w in range(13)]
    check(10, f"counts d={d}", counts == series)
