"""Zhu products, top-component representations and the algebra they generate.

Five top components carry the action of the quadratic strong generators:

* ``SF_plus``: the vacuum line, every generator acts as 0;
* ``SF_minus``: span of ``e^k_(-1)1, f^k_(-1)1``;
* ``SFhat_plus``: the even Grassmann algebra on the zero modes ``e^i_0, f^i_0``,
  small generators act by left multiplication with the matching quadratic,
  large ones by 0;
* ``SFtheta_plus`` and ``SFtheta_minus``: the twisted tops, of dimension 1
  and ``2d``, whose tables are taken as given.

Basis orders are fixed: ``e^1..e^d, f^1..f^d`` for the ``2d``-dimensional
blocks, increasing bitmask (vacuum first) for the Grassmann block.  Matrices
act on column vectors.

The stacked block-diagonal matrices of ``SFhat_plus, SF_minus, SFtheta_plus,
SFtheta_minus`` generate the algebra ``A_d``.  Independently,
:class:`ZhuContext` spans ``O(V)`` inside ``V_{<=cap}`` and reports the
truncated quotient at every cap.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from .c2_poisson import ResourceLimit, invert_map, n_d, strong_family
from .echelon import IntEchelon, available_backends, integerize
from .exact_linalg import (
    AlgebraBasis,
    MatrixQ,
    TrackedBasis,
    algebra_closure,
    min_poly,
    poly_divmod,
    poly_from_roots,
    poly_gcd,
    poly_mul,
    poly_str,
    span_contains,
)
from .fock import Sector, State, basis_bits, basis_by_charge, charge, gen_name, twice_osc_weight
from .reports import Report
from .vertex import (
    QuadraticGenerators,
    SpElement,
    _derive_terms,
    dominant_map,
    generator_label,
    kernel,
    nth_product,
    omega,
    orbit_size,
    relabel,
    sp_basis,
    translation,
)

log = logging.getLogger(__name__)

GenKey = Tuple[str, int, int]

MODULE_IDS = ("SFhat_plus", "SF_minus", "SFtheta_plus", "SFtheta_minus", "SF_plus")
ALIASES = {"SFθ_plus": "SFtheta_plus", "SFθ_minus": "SFtheta_minus"}
STACK_ORDER = ("SFhat_plus", "SF_minus", "SFtheta_plus", "SFtheta_minus")
UNTWISTED_MODULES = ("SF_plus", "SF_minus", "SFhat_plus")


# ---------------------------------------------------------------------------
# Zhu products
# ---------------------------------------------------------------------------

def _degree(a: State) -> int:
    if a.sector is not Sector.UNTWISTED:
        raise ValueError("the left factor must lie in the untwisted sector")
    if a.is_zero():
        return 0
    w = a.weight()
    return int(w)


def zhu_circ_n(a: State, n: int, b: State) -> State:
    """``Res (1+z)^{deg a} / z^{2+n} Y(a,z) b = sum_k C(deg a, k) a_(k-2-n) b``."""
    if a.is_zero():
        return State.zero(b.d, b.sector)
    da = _degree(a)
    out = State.zero(b.d, b.sector)
    for k in range(da + 1):
        out = out + nth_product(a, k - 2 - n, b) * comb(da, k)
    return out


def zhu_star(a: State, b: State) -> State:
    """``a * b = Res (1+z)^{deg a} / z Y(a,z) b = sum_k C(deg a, k) a_(k-1) b``."""
    if a.is_zero():
        return State.zero(b.d, b.sector)
    da = _degree(a)
    out = State.zero(b.d, b.sector)
    for k in range(da + 1):
        out = out + nth_product(a, k - 1, b) * comb(da, k)
    return out


def zhu_circ(a: State, b: State) -> State:
    return zhu_circ_n(a, 0, b)


def star(a: State, b: State) -> State:
    """Bilinear extension of :func:`zhu_star` to inhomogeneous ``a``."""
    out = State.zero(b.d, b.sector)
    for part in a.components().values():
        out = out + zhu_star(part, b)
    return out


def star_power(a: State, k: int) -> State:
    out = State.vacuum(a.d)
    for _ in range(k):
        out = star(a, out)
    return out


# ---------------------------------------------------------------------------
# top-component representations
# ---------------------------------------------------------------------------

def canonical_module(module_id: str) -> str:
    m = ALIASES.get(module_id, module_id)
    if m not in MODULE_IDS:
        raise ValueError(f"unknown module {module_id!r}; expected one of {', '.join(MODULE_IDS)}")
    return m


def grassmann_basis(d: int) -> Tuple[int, ...]:
    """Even zero-mode monomials, increasing bitmask (the vacuum first)."""
    return tuple(sorted(basis_bits(d, Sector.ZERO_EXTENDED, 0, True)))


def _delta(a: int, b: int) -> int:
    return 1 if a == b else 0


@dataclass
class RepBlock:
    module_id: str
    d: int
    labels: List[str]
    gen_matrices: Dict[GenKey, MatrixQ]

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def omega_matrix(self) -> MatrixQ:
        out = MatrixQ.zeros(self.dim)
        for i in range(1, self.d + 1):
            out = out + self.gen_matrices[("h", i, i)]
        return out

    def matrix(self, key: GenKey) -> MatrixQ:
        return self.gen_matrices[key]


def _top_block(d: int, small: Fraction, large: Fraction, shift: Fraction) -> Dict[GenKey, MatrixQ]:
    """Tables on ``e^1..e^d, f^1..f^d``.

    The untwisted odd top and the twisted odd top share one table shape:
    small generators scale by ``small``, large ones by ``large``, and each
    ``h^{ii}`` picks up ``shift`` times the identity.
    """
    n = 2 * d
    E = lambda k: k - 1
    F = lambda k: d + k - 1
    out: Dict[GenKey, MatrixQ] = {}
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            cols = {t: [dict() for _ in range(n)] for t in "efhEFH"}
            for k in range(1, d + 1):
                # column = input vector; entries {row: value}
                ek, fk = E(k), F(k)
                acc = lambda t, col, row, v: cols[t][col].__setitem__(row, cols[t][col].get(row, 0) + v)
                # e^{ij}: f^k -> d_ik e^j - d_jk e^i
                acc("e", fk, E(j), small * _delta(i, k))
                acc("e", fk, E(i), -small * _delta(j, k))
                # f^{ij}: e^k -> d_jk f^i - d_ik f^j
                acc("f", ek, F(i), small * _delta(j, k))
                acc("f", ek, F(j), -small * _delta(i, k))
                # h^{ij}: e^k -> d_jk e^i, f^k -> d_ik f^j
                acc("h", ek, E(i), small * _delta(j, k))
                acc("h", fk, F(j), small * _delta(i, k))
                if i == j:
                    acc("h", ek, ek, shift)
                    acc("h", fk, fk, shift)
                # E^{ij}: f^k -> -(d_ik e^j + d_jk e^i)
                acc("E", fk, E(j), -large * _delta(i, k))
                acc("E", fk, E(i), -large * _delta(j, k))
                # F^{ij}: e^k -> d_jk f^i + d_ik f^j
                acc("F", ek, F(i), large * _delta(j, k))
                acc("F", ek, F(j), large * _delta(i, k))
                # H^{ij}: e^k -> d_jk e^i, f^k -> -d_ik f^j
                acc("H", ek, E(i), large * _delta(j, k))
                acc("H", fk, F(j), -large * _delta(i, k))
            for t, cl in cols.items():
                out[(t, i, j)] = _from_columns(cl, n)
    return out


def _from_columns(columns: Sequence[Dict[int, object]], n: int) -> MatrixQ:
    rows: List[Dict[int, Fraction]] = [dict() for _ in range(n)]
    for c, col in enumerate(columns):
        for r, v in col.items():
            if v:
                rows[r][c] = Fraction(v)
    return MatrixQ.from_rows(rows, n)


def _grassmann_block(d: int) -> Dict[GenKey, MatrixQ]:
    basis = grassmann_basis(d)
    index = {b: i for i, b in enumerate(basis)}
    ker = kernel(d, Sector.ZERO_EXTENDED)
    n = len(basis)

    def mult(x: int, y: int) -> MatrixQ:
        cols = []
        for b in basis:
            t = ker.act(x, 0, ker.act(y, 0, {b: 1}))
            cols.append({index[k]: v for k, v in t.items()})
        return _from_columns(cols, n)

    out: Dict[GenKey, MatrixQ] = {}
    zero = MatrixQ.zeros(n)
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            out[("e", i, j)] = mult(i, j)
            out[("f", i, j)] = mult(i + d, j + d)
            out[("h", i, j)] = mult(i, j + d)
            for t in "EFH":
                out[(t, i, j)] = zero
    return out


def _scalar_block(d: int, h_value: Fraction) -> Dict[GenKey, MatrixQ]:
    out: Dict[GenKey, MatrixQ] = {}
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            for t in "efhEFH":
                v = h_value if (t == "h" and i == j) else 0
                out[(t, i, j)] = MatrixQ.from_dense([[v]])
    return out


def _top_labels(d: int) -> List[str]:
    return [gen_name(d, g) for g in range(1, 2 * d + 1)]


def build_rep_block(d: int, module_id: str) -> RepBlock:
    if d < 1:
        raise ValueError("d must be positive")
    m = canonical_module(module_id)
    if m == "SF_plus":
        return RepBlock(m, d, ["1"], _scalar_block(d, Fraction(0)))
    if m == "SFtheta_plus":
        return RepBlock(m, d, ["1_theta"], _scalar_block(d, Fraction(-1, 8)))
    if m == "SF_minus":
        return RepBlock(m, d, _top_labels(d), _top_block(d, Fraction(1), Fraction(1), Fraction(0)))
    if m == "SFtheta_minus":
        return RepBlock(m, d, _top_labels(d), _top_block(d, Fraction(1, 2), Fraction(1, 4), Fraction(-1, 8)))
    labels = [repr(State(d, Sector.ZERO_EXTENDED, {b: 1}, check=False)).removeprefix("1*") for b in grassmann_basis(d)]
    return RepBlock(m, d, labels, _grassmann_block(d))


# ---------------------------------------------------------------------------
# mode-machinery oracle on the untwisted tops
# ---------------------------------------------------------------------------

def top_states(d: int, module_id: str) -> List[State]:
    m = canonical_module(module_id)
    if m == "SF_plus":
        return [State.vacuum(d)]
    if m == "SF_minus":
        return [State.from_modes(d, [(g, -1)]) for g in range(1, 2 * d + 1)]
    if m == "SFhat_plus":
        return [State(d, Sector.ZERO_EXTENDED, {b: 1}, check=False) for b in grassmann_basis(d)]
    raise NotImplementedError(f"no mode machinery for the twisted module {m}")


def zero_mode_matrix(a: State, tops: Sequence[State]) -> MatrixQ:
    """Matrix of ``o(a) = sum over components a_(deg - 1)`` on the span of ``tops``."""
    index = {}
    for i, t in enumerate(tops):
        (b,) = t.terms
        index[b] = i
    cols = []
    for t in tops:
        img = State.zero(t.d, t.sector)
        for w, part in a.components().items():
            img = img + nth_product(part, int(w) - 1, t)
        col = {}
        for b, v in img.terms.items():
            if b not in index:
                raise AssertionError(f"o(a) leaves the top component: {img!r}")
            col[index[b]] = v
        cols.append(col)
    return _from_columns(cols, len(tops))


def oracle_rep_check(d: int, module_id: str) -> Report:
    m = canonical_module(module_id)
    t0 = time.perf_counter()
    rep = Report("oracle-reps", d, {"module": m})
    block = build_rep_block(d, m)
    tops = top_states(d, m)
    for key, st in QuadraticGenerators.build(d).items():
        got = zero_mode_matrix(st, tops)
        want = block.matrix(key)
        item = rep.add(f"{m}:{generator_label(key)}", _dense_str(want), _dense_str(got), got == want)
        if not item.passed:
            for c, lab in enumerate(block.labels):
                colw = {r: want[r, c] for r in range(block.dim) if want[r, c]}
                colg = {r: got[r, c] for r in range(block.dim) if got[r, c]}
                if colw != colg:
                    rep.notes.append(f"{generator_label(key)} on {lab}: table {colw} machinery {colg}")
                    break
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


def _dense_str(m: MatrixQ) -> List[List[str]]:
    return [[str(x) for x in row] for row in m.to_dense()]


# ---------------------------------------------------------------------------
# the algebra A_d
# ---------------------------------------------------------------------------

@dataclass
class AdAlgebra:
    d: int
    blocks: List[RepBlock]
    gens: Dict[GenKey, MatrixQ]
    omega: MatrixQ
    basis: AlgebraBasis

    @property
    def size(self) -> int:
        return self.omega.rows

    @property
    def dim(self) -> int:
        return self.basis.dim

    def offsets(self) -> List[Tuple[str, int, int]]:
        out, off = [], 0
        for b in self.blocks:
            out.append((b.module_id, off, b.dim))
            off += b.dim
        return out


def stacked(blocks: Sequence[RepBlock], key: GenKey) -> MatrixQ:
    return MatrixQ.block_diag([b.matrix(key) for b in blocks])


def independent_generators(mats: Sequence[MatrixQ]) -> List[MatrixQ]:
    tb = TrackedBasis()
    return [m for m in mats if not m.is_zero() and tb.add(m.vectorize()) is None]


def build_Ad(d: int, strict: bool = True) -> AdAlgebra:
    blocks = [build_rep_block(d, m) for m in STACK_ORDER]
    keys = list(blocks[0].gen_matrices)
    gens = {k: stacked(blocks, k) for k in keys}
    om = MatrixQ.block_diag([b.omega_matrix for b in blocks])
    size = om.rows
    basis = algebra_closure(independent_generators(list(gens.values())), MatrixQ.identity(size))
    A = AdAlgebra(d, blocks, gens, om, basis)
    if strict and A.dim != n_d(d):
        raise AssertionError(f"closure reached dimension {A.dim}, expected {n_d(d)}")
    return A


def expected_factors(d: int) -> List[Tuple[str, List[Fraction]]]:
    q = Fraction(d, 8)
    return [
        ("SFhat_plus", poly_from_roots([0] * (d + 1))),
        ("SF_minus", poly_from_roots([1])),
        ("SFtheta_plus", poly_from_roots([-q])),
        ("SFtheta_minus", poly_from_roots([Fraction(1, 2) - q])),
    ]


def expected_min_poly(d: int) -> List[Fraction]:
    out = [Fraction(1)]
    for _, p in expected_factors(d):
        out = poly_mul(out, p)
    return out


def coprimality_check(d: int, A: Optional[AdAlgebra] = None) -> Report:
    t0 = time.perf_counter()
    rep = Report("coprimality", d)
    blocks = A.blocks if A is not None else [build_rep_block(d, m) for m in STACK_ORDER]
    factors = expected_factors(d)
    mins = []
    for blk, (name, want) in zip(blocks, factors):
        mp = min_poly(blk.omega_matrix)
        mins.append(mp)
        rem = poly_divmod(want, mp)[1]
        rep.add(f"{name}: min poly divides {poly_str(want)}", True, poly_str(mp), not rem)
    for a in range(len(mins)):
        for b in range(a + 1, len(mins)):
            g = poly_gcd(mins[a], mins[b])
            rep.add(f"gcd({factors[a][0]}, {factors[b][0]})", "1", poly_str(g), g == [1])
    om = A.omega if A is not None else MatrixQ.block_diag([b.omega_matrix for b in blocks])
    got = min_poly(om)
    rep.add("stacked omega min poly", poly_str(expected_min_poly(d)), poly_str(got), got == expected_min_poly(d))
    hat = blocks[0].omega_matrix
    rep.add("SFhat_plus nilpotency degree", d + 1, _nilpotency(hat))
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


def _nilpotency(m: MatrixQ) -> Optional[int]:
    p = MatrixQ.identity(m.rows)
    for k in range(1, m.rows + 2):
        p = p @ m
        if p.is_zero():
            return k
    return None


# ---------------------------------------------------------------------------
# center, symmetric functionals, sp invariants
# ---------------------------------------------------------------------------

def _joint_kernel(elements: Sequence[MatrixQ], maps: Sequence) -> List[Dict[int, Fraction]]:
    """Coefficient vectors ``c`` with ``sum c_k f(B_k) = 0`` for every ``f`` in ``maps``."""
    tb = TrackedBasis()
    rels = []
    for B in elements:
        vec: Dict[int, Fraction] = {}
        for idx, f in enumerate(maps):
            img = f(B)
            stride = img.rows * img.cols
            for k, v in img.vectorize().items():
                vec[idx * stride + k] = v
        r = tb.add(vec)
        if r is not None:
            rels.append(r)
    return rels


def _combine(elements: Sequence[MatrixQ], coeffs: Dict[int, Fraction]) -> MatrixQ:
    n = elements[0].rows
    out = MatrixQ.zeros(n)
    for k, c in coeffs.items():
        out = out + elements[k].scale(c)
    return out


def center_dim(A: AdAlgebra) -> Tuple[int, List[MatrixQ]]:
    gens = independent_generators(list(A.gens.values()))
    rels = _joint_kernel(A.basis.elements, [lambda B, g=g: B.commutator(g) for g in gens])
    return len(rels), [_combine(A.basis.elements, r) for r in rels]


def functionals_dim(elements: Sequence[MatrixQ], gens: Sequence[MatrixQ]) -> int:
    """``dim A - dim [A, A]`` with ``[A, A]`` spanned by ``[B_k, g]``."""
    tb = TrackedBasis()
    rank = 0
    for B in elements:
        for g in gens:
            if tb.add(B.commutator(g).vectorize()) is None:
                rank += 1
    return len(elements) - rank


def symmetric_functionals_dim(A: AdAlgebra) -> int:
    return functionals_dim(A.basis.elements, independent_generators(list(A.gens.values())))


def sp_top_matrix(d: int, x: SpElement) -> MatrixQ:
    return MatrixQ.from_dense(x.matrix(d))


def sp_grassmann_matrix(d: int, x: SpElement) -> MatrixQ:
    basis = grassmann_basis(d)
    index = {b: i for i, b in enumerate(basis)}
    cols = []
    for b in basis:
        t = _derive_terms(d, Sector.ZERO_EXTENDED, lambda g: x.image(d, g), {b: 1})
        cols.append({index[k]: v for k, v in t.items()})
    return _from_columns(cols, len(basis))


def sp_derivation_matrix(d: int, x: SpElement) -> MatrixQ:
    top = sp_top_matrix(d, x)
    return MatrixQ.block_diag([sp_grassmann_matrix(d, x), top, MatrixQ.zeros(1), top])


@dataclass
class InvariantReport:
    d: int
    dim: int
    per_degree: Dict[int, int]
    in_omega_span: bool
    invariants: List[MatrixQ] = field(default_factory=list)


def sp_invariants_dim(d: int, A: Optional[AdAlgebra] = None) -> InvariantReport:
    A = A or build_Ad(d)
    ders = [sp_derivation_matrix(d, x) for x in sp_basis(d)]
    rels = _joint_kernel(A.basis.elements, [lambda B, D=D: D.commutator(B) for D in ders])
    inv = [_combine(A.basis.elements, r) for r in rels]
    # invariant lines inside each graded piece of the Grassmann algebra
    basis = grassmann_basis(d)
    per_degree = {}
    gmats = [sp_grassmann_matrix(d, x) for x in sp_basis(d)]
    for k in range(d + 1):
        idx = [i for i, b in enumerate(basis) if b.bit_count() == 2 * k]
        tb = TrackedBasis()
        cnt = 0
        for i in idx:
            vec = {}
            for a, g in enumerate(gmats):
                for r, v in g.apply({i: Fraction(1)}).items():
                    vec[a * len(basis) + r] = v
            if tb.add(vec) is not None:
                cnt += 1
        per_degree[2 * k] = cnt
    # powers of omega span the invariants
    pows, p = [], MatrixQ.identity(A.size)
    for _ in range(A.size + 1):
        pows.append(p.vectorize())
        p = p @ A.omega
    span = MatrixQ.from_rows(pows, A.size * A.size)
    ok = all(span_contains(span, z.vectorize()) for z in inv)
    return InvariantReport(d, len(inv), per_degree, ok, inv)


# ---------------------------------------------------------------------------
# the weight-four identity at d = 2
# ---------------------------------------------------------------------------

J4_COEFFS = {5: Fraction(-144, 5), 4: Fraction(24), 3: Fraction(29, 5)}
# the same identity recovered by reduction modulo O(V) at d = 2, cap 12
J4_COEFFS_MOD_O = {5: Fraction(-144, 5), 4: Fraction(24), 3: Fraction(29, 5), 1: Fraction(2)}


def j4_state(d: int) -> State:
    out = State.zero(d)
    for i in range(1, d + 1):
        out = out + State.from_modes(d, [(i, -3), (i + d, -1)]) - State.from_modes(d, [(i + d, -3), (i, -1)])
    return out


def poly_matrix(coeffs: Dict[int, Fraction], m: MatrixQ) -> MatrixQ:
    out = MatrixQ.zeros(m.rows)
    for k, c in coeffs.items():
        out = out + m.power(k).scale(c)
    return out


def verify_j4(d: int = 2, coeffs: Optional[Dict[int, Fraction]] = None) -> Report:
    if d != 2:
        raise ValueError("the weight-four identity is stated for d = 2 only")
    coeffs = dict(J4_COEFFS if coeffs is None else coeffs)
    t0 = time.perf_counter()
    rep = Report("j4", d, {"coeffs": {str(k): v for k, v in sorted(coeffs.items())}})
    J = j4_state(d)
    for m in ("SFhat_plus", "SF_minus"):
        blk = build_rep_block(d, m)
        lhs = zero_mode_matrix(J, top_states(d, m))
        rhs = poly_matrix(coeffs, blk.omega_matrix)
        rep.add(f"{m}: o(J4) = p(o(omega))", _dense_str(rhs), _dense_str(lhs), lhs == rhs)
    rep.notes.append("twisted blocks not independently verified")
    rep.elapsed_ms = int((time.perf_counter() - t0) * 1000)
    return rep


# ---------------------------------------------------------------------------
# truncated O(V) span
# ---------------------------------------------------------------------------

@dataclass
class ZhuBlock:
    charge: Tuple[int, ...]
    columns: Tuple[int, ...]
    index: Dict[int, int]
    weight_counts: Dict[int, int]
    echelon: object
    rank_by_weight: Dict[int, int] = field(default_factory=dict)
    rows_used: int = 0

    def columns_upto(self, w: int) -> int:
        return sum(c for k, c in self.weight_counts.items() if k <= w)


def _even_charges(d: int, cap: int) -> List[Tuple[int, ...]]:
    seen = set()
    for w in range(cap + 1):
        seen.update(basis_by_charge(d, Sector.UNTWISTED, 2 * w, True))
    return sorted(seen, reverse=True)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def zhu_row_sources(d: int, W: int, ch: Tuple[int, ...], generator_set: str = "strong"):
    """``(a_bits, wt a, n, v_bits)`` with ``a o_n v`` of top weight ``W`` in charge block ``ch``."""
    if generator_set == "strong":
        srcs = []
        for s, ws, cs in strong_family(d):
            cv = _sub(ch, cs)
            for n in range(0, W - ws):
                wv = W - ws - n - 1
                for v in basis_by_charge(d, Sector.UNTWISTED, 2 * wv, True).get(cv, ()):
                    srcs.append((n, ws, s, v))
        srcs.sort(key=lambda t: (-t[3], t[0], t[1]))
        for n, ws, s, v in srcs:
            yield s, ws, n, v
    elif generator_set == "all_pairs":
        for wa in range(1, W):
            wb = W - 1 - wa
            for ca, alist in basis_by_charge(d, Sector.UNTWISTED, 2 * wa, True).items():
                cb = _sub(ch, ca)
                for a in alist:
                    for b in basis_by_charge(d, Sector.UNTWISTED, 2 * wb, True).get(cb, ()):
                        yield a, wa, 0, b
    else:
        raise ValueError(f"unknown generator set {generator_set!r}")


def circ_terms(d: int, a_bits: int, wa: int, n: int, v_bits: int) -> Dict[int, object]:
    ker = kernel(d)
    out: Dict[int, object] = {}
    for k in range(wa + 1):
        c = comb(wa, k)
        for b, x in ker.product(a_bits, k - 2 - n, {v_bits: 1}).items():
            nv = out.get(b, 0) + c * x
            if nv:
                out[b] = nv
            else:
                out.pop(b)
    return out


@dataclass
class ZhuTruncation:
    d: int
    cap_weight: int
    window: int
    ambient: List[int]
    quotient: List[int]
    stabilized: bool
    generator_set: str = "strong"
    elapsed_ms: int = 0

    @property
    def dim(self) -> Optional[int]:
        return self.quotient[-1] if self.stabilized else None

    @property
    def passed(self) -> bool:
        return self.stabilized and self.dim == n_d(self.d)

    def to_report(self) -> Report:
        rep = Report("zhu-direct", self.d, {"cap": self.cap_weight, "window": self.window, "generators": self.generator_set})
        rep.metadata["quotient_by_cap"] = list(self.quotient)
        rep.metadata["ambient_by_cap"] = list(self.ambient)
        rep.add("stabilized", True, self.stabilized)
        if self.stabilized:
            rep.add("dim A(V)", n_d(self.d), self.dim)
        else:
            rep.inconclusive = True
            rep.notes.append(f"quotient not constant over the last {self.window} caps: {self.quotient[-self.window:]}")
        rep.elapsed_ms = self.elapsed_ms
        return rep


class ZhuContext:
    """``O(V) ∩ V_{<=cap}`` spanned by ``s o_n v``, one charge block at a time.

    Columns run over weights ``cap..0`` so pivots sit on top-weight monomials;
    rows are processed by increasing top weight, which yields the truncated
    quotient at every smaller cap in the same pass.
    """

    def __init__(self, d: int, cap: int, generator_set: str = "strong", use_symmetry: bool = True,
                 backend: Optional[str] = None, column_cap: int = 400_000):
        self.d = d
        self.cap = cap
        self.generator_set = generator_set
        self.use_symmetry = use_symmetry
        self.backend = backend
        self.column_cap = column_cap
        self._blocks: Dict[Tuple[int, ...], ZhuBlock] = {}

    def charges(self) -> List[Tuple[int, ...]]:
        out = _even_charges(self.d, self.cap)
        if self.use_symmetry:
            out = [c for c in out if dominant_map(self.d, c)[0] == c]
        return out

    def block(self, ch: Tuple[int, ...]) -> ZhuBlock:
        ch = tuple(ch)
        blk = self._blocks.get(ch)
        if blk is None:
            blk = self._build(ch)
            self._blocks[ch] = blk
        return blk

    def _build(self, ch: Tuple[int, ...]) -> ZhuBlock:
        d = self.d
        cols: List[int] = []
        counts: Dict[int, int] = {}
        for w in range(self.cap, -1, -1):
            bs = basis_by_charge(d, Sector.UNTWISTED, 2 * w, True).get(ch, ())
            counts[w] = len(bs)
            cols.extend(bs)
        if len(cols) > self.column_cap:
            raise ResourceLimit(f"Zhu block charge={ch} has {len(cols)} columns")
        cls = IntEchelon if self.backend is None else available_backends()[self.backend]
        ech = cls(len(cols))
        blk = ZhuBlock(ch, tuple(cols), {b: i for i, b in enumerate(cols)}, counts, ech)
        for W in range(self.cap + 1):
            full_below = blk.columns_upto(W)
            for a, wa, n, v in zhu_row_sources(d, W, ch, self.generator_set):
                if ech.rank == full_below:
                    break
                r = circ_terms(d, a, wa, n, v)
                blk.rows_used += 1
                if not r:
                    continue
                it = sorted((blk.index[b], x) for b, x in r.items())
                ech.add([k for k, _ in it], [x for _, x in it])
            blk.rank_by_weight[W] = ech.rank
        return blk

    def run(self) -> Tuple[List[int], List[int]]:
        """Ambient dimension and quotient dimension of ``V_{<=W}`` for ``W = 0..cap``."""
        amb = [0] * (self.cap + 1)
        quo = [0] * (self.cap + 1)
        for ch in self.charges():
            blk = self.block(ch)
            mult = orbit_size(ch) if self.use_symmetry else 1
            for W in range(self.cap + 1):
                a = blk.columns_upto(W)
                amb[W] += mult * a
                quo[W] += mult * (a - blk.rank_by_weight[W])
        return amb, quo

    # -- membership ---------------------------------------------------------
    def _parts(self, s: State):
        if s.sector is not Sector.UNTWISTED:
            raise ValueError("O(V) lives in the untwisted sector")
        parts: Dict[Tuple[int, ...], Dict[int, object]] = {}
        for b, v in s.terms.items():
            if b.bit_count() & 1:
                raise ValueError("only even states are reduced modulo O(V)")
            if twice_osc_weight(self.d, Sector.UNTWISTED, b) > 2 * self.cap:
                raise ValueError(f"state exceeds the cap weight {self.cap}")
            parts.setdefault(charge(self.d, b), {})[b] = v
        return parts

    def _transport(self, ch, terms):
        if self.use_symmetry:
            dom, gmap = dominant_map(self.d, ch)
            if dom != tuple(ch):
                return self.block(dom), relabel(State(self.d, Sector.UNTWISTED, terms, check=False), gmap).terms, gmap
            return self.block(dom), terms, None
        return self.block(ch), terms, None

    def residual(self, s: State) -> State:
        """Representative of ``s + O(V)`` supported on non-pivot monomials."""
        out: Dict[int, object] = {}
        for ch, terms in self._parts(s).items():
            blk, t, gmap = self._transport(ch, terms)
            ks, vs, den = integerize(t)
            it = sorted((blk.index[b], x) for b, x in zip(ks, vs))
            rk, rv, num, sden = blk.echelon.reduce([k for k, _ in it], [x for _, x in it])
            fac = Fraction(sden, num * den)
            r = {blk.columns[k]: c * fac for k, c in zip(rk, rv)}
            if gmap is not None:
                r = relabel(State(self.d, Sector.UNTWISTED, r, check=False), invert_map(self.d, gmap)).terms
            for b, c in r.items():
                nv = out.get(b, 0) + c
                if nv:
                    out[b] = nv
                else:
                    out.pop(b, None)
        return State(self.d, Sector.UNTWISTED, out, check=False)

    def contains(self, s: State) -> bool:
        return self.residual(s).is_zero()


def direct_zhu_dim(d: int, cap_weight: int, window: int = 3, generator_set: str = "strong",
                   use_symmetry: bool = True, backend: Optional[str] = None,
                   ctx: Optional[ZhuContext] = None) -> ZhuTruncation:
    if d < 1:
        raise ValueError("d must be positive")
    t0 = time.perf_counter()
    ctx = ctx or ZhuContext(d, cap_weight, generator_set, use_symmetry, backend)
    amb, quo = ctx.run()
    tail = quo[-window:]
    stable = len(quo) >= window and len(set(tail)) == 1
    return ZhuTruncation(d, cap_weight, window, amb, quo, stable, generator_set,
                         int((time.perf_counter() - t0) * 1000))


def j4_polynomial_mod_O(ctx: ZhuContext, degree: int = 5) -> Optional[Dict[int, Fraction]]:
    """Coefficients ``c_k`` with ``J4 = sum c_k omega^{*k}`` modulo ``O(V)``, or ``None``."""
    d = ctx.d
    om = omega(d)
    vecs = []
    p = State.vacuum(d)
    for _ in range(degree + 1):
        vecs.append(ctx.residual(p).terms)
        p = star(om, p)
    tb = TrackedBasis()
    for v in vecs:
        if tb.add(v) is not None:
            return None
    rel = tb.add(ctx.residual(j4_state(d)).terms)
    if rel is None:
        return None
    top = rel[degree + 1]
    return {k: -c / top for k, c in sorted(rel.items()) if k <= degree and c}


def j4_membership(ctx: ZhuContext, coeffs: Optional[Dict[int, Fraction]] = None) -> bool:
    d = ctx.d
    coeffs = J4_COEFFS if coeffs is None else coeffs
    om = omega(d)
    rhs = State.zero(d)
    for k, c in coeffs.items():
        rhs = rhs + star_power(om, k) * c
    return ctx.contains(j4_state(d) - rhs)


def translation_in_O(ctx: ZhuContext, a: State) -> bool:
    """``(L(-1) + L(0)) a`` for homogeneous ``a``."""
    return ctx.contains(translation(a) + a * a.weight())


# ---------------------------------------------------------------------------
# exact CSV
# ---------------------------------------------------------------------------

def matrix_csv(m: MatrixQ) -> str:
    lines = []
    for row in m.to_dense():
        lines.append(",".join(f"{x.numerator}/{x.denominator}" for x in row))
    return "\n".join(lines) + "\n"


def parse_matrix_csv(text: str) -> MatrixQ:
    rows = [[Fraction(x) for x in line.split(",")] for line in text.strip().splitlines()]
    return MatrixQ.from_dense(rows)
