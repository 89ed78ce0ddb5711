"""Exact rational linear algebra.

Everything here works over ``fractions.Fraction`` (plain ``int`` values are
accepted wherever a rational is expected).  Vectors are sparse dicts mapping a
column index to a nonzero coefficient; matrices are tuples of such rows.

The large elimination workloads (C2 spans, O(V) spans) go through
:class:`symfer.echelon.Echelon`, which has a compiled backend.  The routines in
this module are the small-matrix toolkit used for representation blocks,
algebra closures and minimal polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

Rational = Fraction
SparseVector = Dict[int, Fraction]


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def clean(v: dict) -> SparseVector:
    """Drop zero entries and coerce values to Fraction."""
    return {k: as_rational(c) for k, c in v.items() if c != 0}


def vec_axpy(y: dict, a, x: dict) -> None:
    """In-place ``y += a*x`` with zero pruning."""
    if a == 0:
        return
    for k, c in x.items():
        nv = y.get(k, 0) + a * c
        if nv == 0:
            y.pop(k, None)
        else:
            y[k] = nv


@dataclass(frozen=True)
class MatrixQ:
    rows: int
    cols: int
    data: Tuple[SparseVector, ...] = field(compare=False)

    def __post_init__(self):
        if len(self.data) != self.rows:
            raise ValueError(f"expected {self.rows} rows, got {len(self.data)}")
        for r in self.data:
            for k, c in r.items():
                if not 0 <= k < self.cols:
                    raise ValueError(f"column {k} out of range for {self.cols} columns")
                if c == 0:
                    raise ValueError("stored zero entry")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Iterable[dict], cols: int) -> "MatrixQ":
        data = tuple(clean(r) for r in rows)
        return cls(len(data), cols, data)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence]) -> "MatrixQ":
        dense = [list(r) for r in dense]
        cols = len(dense[0]) if dense else 0
        if any(len(r) != cols for r in dense):
            raise ValueError("ragged dense matrix")
        return cls.from_rows(({j: c for j, c in enumerate(r) if c != 0} for r in dense), cols)

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> "MatrixQ":
        cols = rows if cols is None else cols
        return cls(rows, cols, tuple({} for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "MatrixQ":
        return cls(n, n, tuple({i: Fraction(1)} for i in range(n)))

    @classmethod
    def block_diag(cls, blocks: Sequence["MatrixQ"]) -> "MatrixQ":
        data: List[SparseVector] = []
        off = 0
        for b in blocks:
            for r in b.data:
                data.append({k + off: c for k, c in r.items()})
            off += b.cols
        return cls(len(data), off, tuple(data))

    # -- access ---------------------------------------------------------------
    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.data[i].get(j, Fraction(0))

    def to_dense(self) -> List[List[Fraction]]:
        return [[r.get(j, Fraction(0)) for j in range(self.cols)] for r in self.data]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return not any(self.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixQ):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and all(
            a == b for a, b in zip(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(sorted(r.items())) for r in self.data)))

    def __repr__(self):
        return f"MatrixQ({self.rows}x{self.cols}, nnz={sum(map(len, self.data))})"

    # -- arithmetic -----------------------------------------------------------
    def transpose(self) -> "MatrixQ":
        out: List[SparseVector] = [{} for _ in range(self.cols)]
        for i, r in enumerate(self.data):
            for j, c in r.items():
                out[j][i] = c
        return MatrixQ(self.cols, self.rows, tuple(out))

    def __add__(self, other: "MatrixQ") -> "MatrixQ":
        self._check_shape(other)
        data = []
        for a, b in zip(self.data, other.data):
            r = dict(a)
            vec_axpy(r, 1, b)
            data.append(r)
        return MatrixQ(self.rows, self.cols, tuple(data))

    def __sub__(self, other: "MatrixQ") -> "MatrixQ":
        return self + other.scale(-1)

    def __neg__(self) -> "MatrixQ":
        return self.scale(-1)

    def scale(self, a) -> "MatrixQ":
        a = as_rational(a)
        if a == 0:
            return MatrixQ.zeros(self.rows, self.cols)
        return MatrixQ(self.rows, self.cols, tuple({k: a * c for k, c in r.items()} for r in self.data))

    def __rmul__(self, a) -> "MatrixQ":
        return self.scale(a)

    def __matmul__(self, other: "MatrixQ") -> "MatrixQ":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        data = []
        for r in self.data:
            acc: dict = {}
            for k, c in r.items():
                vec_axpy(acc, c, other.data[k])
            data.append(acc)
        return MatrixQ(self.rows, other.cols, tuple(data))

    def apply(self, v: dict) -> SparseVector:
        """Matrix-vector product ``M v`` for a sparse column vector."""
        out = {}
        for i, r in enumerate(self.data):
            s = sum((c * v[k] for k, c in r.items() if k in v), Fraction(0))
            if s:
                out[i] = s
        return out

    def power(self, k: int) -> "MatrixQ":
        if not self.is_square():
            raise ValueError("power of a non-square matrix")
        out = MatrixQ.identity(self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def commutator(self, other: "MatrixQ") -> "MatrixQ":
        return self @ other - other @ self

    def vectorize(self) -> SparseVector:
        """Flatten row-major into a sparse vector of length rows*cols."""
        n = self.cols
        return {i * n + j: c for i, r in enumerate(self.data) for j, c in r.items()}

    @classmethod
    def unvectorize(cls, v: dict, rows: int, cols: int) -> "MatrixQ":
        data: List[SparseVector] = [{} for _ in range(rows)]
        for k, c in v.items():
            if c:
                data[k // cols][k % cols] = as_rational(c)
        return cls(rows, cols, tuple(data))

    def _check_shape(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")


# ---------------------------------------------------------------------------
# Gauss-Jordan over Q
# ---------------------------------------------------------------------------

def _lead(v: dict) -> int:
    return min(v)


def rref(m: MatrixQ) -> Tuple[int, List[int], MatrixQ]:
    """Reduced row echelon form.

    Returns ``(rank, pivot_cols, reduced)`` where ``reduced`` has the same
    shape as ``m`` with the nonzero rows first, sorted by pivot column.
    """
    pivots: Dict[int, SparseVector] = {}
    for row in m.data:
        v = dict(row)
        while v:
            c = _lead(v)
            p = pivots.get(c)
            if p is None:
                inv = 1 / as_rational(v[c])
                pivots[c] = {k: x * inv for k, x in v.items()}
                break
            vec_axpy(v, -v[c], p)
    # back-substitution, last pivot first
    cols = sorted(pivots)
    for c in reversed(cols):
        p = pivots[c]
        for c2 in cols:
            if c2 > c and c2 in p:
                vec_axpy(p, -p[c2], pivots[c2])
    rows = [clean(pivots[c]) for c in cols]
    rows += [{} for _ in range(m.rows - len(rows))]
    return len(cols), cols, MatrixQ(m.rows, m.cols, tuple(rows))


def rank(m: MatrixQ) -> int:
    return rref(m)[0]


def kernel(m: MatrixQ) -> List[SparseVector]:
    """Basis of the right null space ``{x : m x = 0}``."""
    r, pivots, red = rref(m)
    pivset = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivset:
            continue
        v = {free: Fraction(1)}
        for row, pc in zip(red.data[:r], pivots):
            c = row.get(free)
            if c:
                v[pc] = -c
        basis.append(v)
    return basis


def span_contains(span_rows: MatrixQ, v: dict) -> bool:
    """True iff ``v`` lies in the row space of ``span_rows``."""
    if any(k >= span_rows.cols or k < 0 for k in v) and any(v.values()):
        raise ValueError("vector wider than span")
    _, pivots, red = rref(span_rows)
    w = clean(v)
    for row, pc in zip(red.data, pivots):
        c = w.get(pc)
        if c:
            vec_axpy(w, -c, row)
    return not w


class TrackedBasis:
    """Incremental echelon basis that remembers how each row was built.

    Used for linear-dependence searches (minimal polynomials, kernels of
    small maps) where the relation among the inputs is the answer.
    """

    def __init__(self):
        self.pivots: Dict[int, Tuple[SparseVector, SparseVector]] = {}
        self.count = 0

    def add(self, v: dict) -> Optional[SparseVector]:
        """Insert ``v``; return ``None`` if independent, else the relation.

        The relation is a dict ``{input_index: coeff}`` with
        ``sum coeff * input == 0`` and coefficient 1 on the new input.
        """
        idx = self.count
        self.count += 1
        w = clean(v)
        combo: SparseVector = {idx: Fraction(1)}
        while w:
            c = _lead(w)
            p = self.pivots.get(c)
            if p is None:
                inv = 1 / w[c]
                self.pivots[c] = ({k: x * inv for k, x in w.items()}, {k: x * inv for k, x in combo.items()})
                return None
            a = -w[c]
            vec_axpy(w, a, p[0])
            vec_axpy(combo, a, p[1])
        return combo


# ---------------------------------------------------------------------------
# Polynomials over Q, coefficient lists low -> high degree
# ---------------------------------------------------------------------------

Poly = List[Fraction]


def poly_trim(p: Sequence) -> Poly:
    p = [as_rational(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_mul(p: Sequence, q: Sequence) -> Poly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly_trim(out)


def poly_divmod(p: Sequence, q: Sequence) -> Tuple[Poly, Poly]:
    p, q = poly_trim(p), poly_trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    quo = [Fraction(0)] * max(len(p) - len(q) + 1, 0)
    rem = list(p)
    while len(rem) >= len(q):
        f = rem[-1] / q[-1]
        s = len(rem) - len(q)
        quo[s] = f
        for i, b in enumerate(q):
            rem[s + i] -= f * b
        rem = poly_trim(rem)
    return poly_trim(quo), rem


def poly_monic(p: Sequence) -> Poly:
    p = poly_trim(p)
    return [c / p[-1] for c in p] if p else []


def poly_gcd(p: Sequence, q: Sequence) -> Poly:
    a, b = poly_trim(p), poly_trim(q)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return poly_monic(a)


def poly_from_roots(roots: Iterable) -> Poly:
    out: Poly = [Fraction(1)]
    for r in roots:
        out = poly_mul(out, [-as_rational(r), Fraction(1)])
    return out


def poly_eval_matrix(p: Sequence, m: MatrixQ) -> MatrixQ:
    """Horner evaluation ``p(m)``."""
    n = m.rows
    acc = MatrixQ.zeros(n)
    for c in reversed(poly_trim(p)):
        acc = acc @ m + MatrixQ.identity(n).scale(c)
    return acc


def poly_str(p: Sequence, var: str = "x") -> str:
    terms = []
    for k in range(len(p) - 1, -1, -1):
        c = as_rational(p[k])
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if mono and c == 1:
            terms.append(f"+{mono}")
        elif mono and c == -1:
            terms.append(f"-{mono}")
        else:
            s = f"{c}" if c < 0 else f"+{c}"
            terms.append(s + (f"*{mono}" if mono else ""))
    out = "".join(terms).lstrip("+")
    return out or "0"


def min_poly(m: MatrixQ) -> Poly:
    """Monic minimal polynomial by a Krylov search on matrix powers."""
    if not m.is_square():
        raise ValueError(f"min_poly needs a square matrix, got {m.rows}x{m.cols}")
    tb = TrackedBasis()
    power = MatrixQ.identity(m.rows)
    for k in range(m.rows + 1):
        rel = tb.add(power.vectorize())
        if rel is not None:
            coeffs = [rel.get(i, Fraction(0)) for i in range(k + 1)]
            return poly_monic(coeffs)
        power = power @ m
    raise AssertionError("Cayley-Hamilton violated")  # pragma: no cover


# ---------------------------------------------------------------------------
# Matrix algebra closure
# ---------------------------------------------------------------------------

@dataclass
class AlgebraBasis:
    size: int
    elements: List[MatrixQ]
    rounds: int

    @property
    def dim(self) -> int:
        return len(self.elements)

    def coordinates_matrix(self) -> MatrixQ:
        return MatrixQ.from_rows([e.vectorize() for e in self.elements], self.size * self.size)


def algebra_closure(gens: Sequence[MatrixQ], unit: MatrixQ, max_rounds: Optional[int] = None) -> AlgebraBasis:
    """Span of all words in ``gens`` (including the empty word ``unit``).

    Each round multiplies the elements added in the previous round on the
    right by every generator.  Words of length k+1 are words of length k
    times a generator, so this reaches the whole subalgebra; the dimension
    is bounded by size**2, which caps the number of rounds.
    """
    n = unit.rows
    for g in gens:
        if (g.rows, g.cols) != (n, n):
            raise ValueError("generators must share the unit's square shape")
    cap = n * n if max_rounds is None else max_rounds
    tb = TrackedBasis()
    elements: List[MatrixQ] = []

    def insert(x: MatrixQ) -> bool:
        if tb.add(x.vectorize()) is None:
            elements.append(x)
            return True
        return False

    insert(unit)
    frontier = list(elements)
    rounds = 0
    while frontier and rounds < cap:
        rounds += 1
        new = []
        for b in frontier:
            for g in gens:
                x = b @ g
                if insert(x):
                    new.append(x)
        frontier = new
    return AlgebraBasis(n, elements, rounds)
