"""Mode actions, n-th products and symmetries of symplectic fermions.

Conventions: ``Y(a, z) = sum_n a_(n) z^{-n-1}`` and the modes of the odd
generators satisfy ``{x_(m), y_(n)} = m <x, y> delta_{m+n,0}`` with
``<e^i, f^j> = -delta_ij``.  On the vacuum module zero modes act as 0; on the
zero-extended module they multiply by the Grassmann generators ``x_0``.

Products ``a_(n) b`` are computed from the iterate formula, peeling the
leftmost mode off ``a``::

    (x_(-m) u)_(n) c = sum_j C(m+j-1, j) [ x_(-m-j) u_(n+j) c
                                            - (-1)^(m+|u|) u_(n-m-j) x_(j) c ]

with single-mode states handled in closed form:
``(x_(-m) 1)_(k) = C(m-k-2, m-1) x_(k-m+1)``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .fock import (
    AlgebraConfig,
    ModeKey,
    Sector,
    State,
    basis_bits,
    gen_name,
    iter_bits,
    pairing,
    partner,
    twice_osc_weight,
)

Terms = Dict[int, object]


def gbinom(r: int, k: int) -> int:
    """Binomial coefficient with arbitrary integer upper index."""
    if k < 0:
        return 0
    num = 1
    den = 1
    for i in range(k):
        num *= r - i
        den *= i + 1
    return num // den


def _acc(out: Terms, terms: Terms, c=1) -> None:
    if c == 0:
        return
    for k, v in terms.items():
        nv = out.get(k, 0) + c * v
        if nv:
            out[k] = nv
        else:
            del out[k]


class ModeKernel:
    """Mode operators on bitmask-indexed states of one sector."""

    def __init__(self, d: int, sector: Sector, pairing_sign: int = 1, cache_size: int = 200_000):
        self.d = d
        self.G = 2 * d
        self.sector = Sector(sector)
        self.twisted = self.sector is Sector.TWISTED
        self.zero_ok = self.sector is Sector.ZERO_EXTENDED
        # pairing_sign = -1 is a test hook that corrupts every contraction
        self.pairing_sign = pairing_sign
        self._cache: Dict[Tuple[int, int, int], Terms] = {}
        self._cache_size = cache_size

    # -- single modes ---------------------------------------------------------
    def bit(self, g: int, level: int) -> int:
        return level * self.G + (self.G - g)

    @staticmethod
    def create(terms: Terms, bit: int, c=1) -> Terms:
        out = {}
        one = 1 << bit
        sh = bit + 1
        for b, v in terms.items():
            if b & one:
                continue
            out[b | one] = -c * v if (b >> sh).bit_count() & 1 else c * v
        return out

    @staticmethod
    def annihilate(terms: Terms, bit: int, c) -> Terms:
        out = {}
        one = 1 << bit
        sh = bit + 1
        for b, v in terms.items():
            if not b & one:
                continue
            out[b ^ one] = -c * v if (b >> sh).bit_count() & 1 else c * v
        return out

    def act_int(self, g: int, n: int, terms: Terms, c=1) -> Terms:
        """``c * x^g_(n)`` on an integral-sector state."""
        if n < 0:
            return self.create(terms, self.bit(g, -n), c)
        if n == 0:
            return self.create(terms, self.bit(g, 0), c) if self.zero_ok else {}
        p = partner(self.d, g)
        return self.annihilate(terms, self.bit(p, n), c * n * pairing(self.d, g, p) * self.pairing_sign)

    def act(self, g: int, depth, terms: Terms, c=1) -> Terms:
        if not 1 <= g <= self.G:
            raise ValueError(f"generator index {g} outside 1..{self.G}")
        depth = Fraction(depth)
        if self.twisted:
            if depth.denominator != 2:
                raise ValueError(f"twisted modes are half-odd, got {depth}")
            if depth < 0:
                return self.create(terms, self.bit(g, int(Fraction(1, 2) - depth)), c)
            p = partner(self.d, g)
            f = depth * pairing(self.d, g, p) * self.pairing_sign
            return self.annihilate(terms, self.bit(p, int(depth + Fraction(1, 2))), c * f)
        if depth.denominator != 1:
            raise ValueError(f"{self.sector.value} modes are integral, got {depth}")
        return self.act_int(g, int(depth), terms, c)

    # -- n-th products ----------------------------------------------------------
    def _bounds(self, terms: Terms) -> Tuple[int, int]:
        G = self.G
        w = 0
        lv = 0
        for b in terms:
            tw = twice_osc_weight(self.d, self.sector, b)
            if tw > w:
                w = tw
            if b:
                l = (b.bit_length() - 1) // G
                if l > lv:
                    lv = l
        return w // 2, lv

    def product(self, a_bits: int, n: int, terms: Terms) -> Terms:
        """``(a)_(n) c`` for a monomial ``a`` (untwisted) and state ``c``."""
        if self.twisted:
            raise NotImplementedError("n-th products into the twisted sector are not supported")
        if not terms:
            return {}
        if a_bits == 0:
            return dict(terms) if n == -1 else {}
        G = self.G
        top = a_bits.bit_length() - 1
        m = top // G
        g = G - top % G
        u = a_bits ^ (1 << top)
        if u == 0:
            coef = gbinom(m - n - 2, m - 1)
            return self.act_int(g, n - m + 1, terms, coef) if coef else {}
        if u.bit_count() >= 2:
            out: Terms = {}
            for b, v in terms.items():
                _acc(out, self.product_mono(a_bits, n, b), v)
            return out
        wu = twice_osc_weight(self.d, Sector.UNTWISTED, u) // 2
        wc, lc = self._bounds(terms)
        jmax = max(wu + wc - 1 - n, lc, 0)
        sgn = -1 if (m + u.bit_count()) & 1 else 1
        out = {}
        for j in range(jmax + 1):
            coef = gbinom(m + j - 1, j)
            t1 = self.product(u, n + j, terms)
            if t1:
                _acc(out, self.create(t1, self.bit(g, m + j)), coef)
            xc = self.act_int(g, j, terms)
            if xc:
                _acc(out, self.product(u, n - m - j, xc), -sgn * coef)
        return out

    def product_mono(self, a_bits: int, n: int, c_bits: int) -> Terms:
        key = (a_bits, n, c_bits)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        res = self._product_long(a_bits, n, c_bits)
        if len(self._cache) >= self._cache_size:
            self._cache.clear()
        self._cache[key] = res
        return res

    def _product_long(self, a_bits: int, n: int, c_bits: int) -> Terms:
        terms = {c_bits: 1}
        G = self.G
        top = a_bits.bit_length() - 1
        m = top // G
        g = G - top % G
        u = a_bits ^ (1 << top)
        wu = twice_osc_weight(self.d, Sector.UNTWISTED, u) // 2
        wc, lc = self._bounds(terms)
        jmax = max(wu + wc - 1 - n, lc, 0)
        sgn = -1 if (m + u.bit_count()) & 1 else 1
        out: Terms = {}
        for j in range(jmax + 1):
            coef = gbinom(m + j - 1, j)
            t1 = self.product(u, n + j, terms)
            if t1:
                _acc(out, self.create(t1, self.bit(g, m + j)), coef)
            xc = self.act_int(g, j, terms)
            if xc:
                _acc(out, self.product(u, n - m - j, xc), -sgn * coef)
        return out

    def state_product(self, a: Terms, n: int, b: Terms) -> Terms:
        out: Terms = {}
        for ab, av in a.items():
            _acc(out, self.product(ab, n, b), av)
        return out


@lru_cache(maxsize=None)
def kernel(d: int, sector: Sector = Sector.UNTWISTED) -> ModeKernel:
    return ModeKernel(d, Sector(sector))


# ---------------------------------------------------------------------------
# public operations on State
# ---------------------------------------------------------------------------

def contraction(a: ModeKey, b: ModeKey, d: int) -> Fraction:
    """``{a, b}`` as a scalar: ``m <x, y> delta_{m+n,0}`` for ``a = x_(m)``, ``b = y_(n)``."""
    m, n = Fraction(a.depth), Fraction(b.depth)
    if m + n != 0:
        return Fraction(0)
    return m * pairing(d, a.gen, b.gen)


def apply_mode(k: ModeKey, s: State) -> State:
    """``x^g_(n) s`` for any admissible depth of the state's sector."""
    ker = kernel(s.d, s.sector)
    return State(s.d, s.sector, ker.act(k.gen, k.depth, s.terms), check=False)


def apply_modes(modes: Sequence[Tuple[int, object]], s: State) -> State:
    """Apply ``x^{g1}_(n1) ... x^{gk}_(nk)`` (rightmost first)."""
    ker = kernel(s.d, s.sector)
    t = s.terms
    for g, n in reversed(modes):
        t = ker.act(g, n, t)
    return State(s.d, s.sector, t, check=False)


def nth_product(a: State, n: int, b: State) -> State:
    """``a_(n) b`` for ``a`` in the vacuum module."""
    if a.sector is not Sector.UNTWISTED:
        raise ValueError(f"a must lie in the untwisted sector, got {a.sector.value}")
    if b.sector is Sector.TWISTED:
        raise NotImplementedError("n-th products into the twisted sector are not supported")
    if a.d != b.d:
        raise ValueError(f"rank mismatch: {a.d} vs {b.d}")
    ker = kernel(b.d, b.sector)
    return State(b.d, b.sector, ker.state_product(a.terms, int(n), b.terms), check=False)


def virasoro(n: int, s: State) -> State:
    """``L(n) s = omega_(n+1) s``."""
    return nth_product(omega(s.d), n + 1, s)


def translation(s: State) -> State:
    return virasoro(-1, s)


# ---------------------------------------------------------------------------
# named states
# ---------------------------------------------------------------------------

def e(i: int) -> int:
    return i


def f(d: int, i: int) -> int:
    return i + d


def quad(d: int, g: int, m: int, h: int, k: int = 1, coeff=1) -> State:
    """``x^g_(-m) x^h_(-k) 1``."""
    return State.from_modes(d, [(g, -m), (h, -k)], coeff=coeff)


def omega(d: int) -> State:
    out = State.zero(d)
    for i in range(1, d + 1):
        out = out + quad(d, i, 1, i + d)
    return out


def Z_state(d: int, i: int = 1, j: int = 2) -> State:
    """``(h^{ii})_(-1) h^{jj}``."""
    return nth_product(quad(d, i, 1, i + d), -1, quad(d, j, 1, j + d))


def J4(d: int) -> State:
    out = State.zero(d)
    for i in range(1, d + 1):
        out = out + quad(d, i, 3, i + d) - quad(d, i + d, 3, i)
    return out


def B_state(d: int, ms: Sequence[int], gens: Sequence[int]) -> State:
    """Normalized monomial ``prod (m_i - 1)! / (sum m_i - 1)! * a^1_(-m_1) ... 1``."""
    if len(ms) != len(gens) or not ms:
        raise ValueError("need matching nonempty mode and generator lists")
    num = 1
    for m in ms:
        num *= _fact(m - 1)
    coeff = Fraction(num, _fact(sum(ms) - 1))
    return State.from_modes(d, [(g, -m) for g, m in zip(gens, ms)], coeff=coeff)


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


@dataclass
class QuadraticGenerators:
    """The weight-2 and weight-3 strong generators of the even subalgebra."""

    d: int
    small: Dict[Tuple[str, int, int], State] = field(default_factory=dict)
    large: Dict[Tuple[str, int, int], State] = field(default_factory=dict)
    omega: Optional[State] = None

    @classmethod
    def build(cls, d: int) -> "QuadraticGenerators":
        q = cls(d)
        half = Fraction(1, 2)
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                ei, ej, fi, fj = i, j, i + d, j + d
                q.small[("e", i, j)] = quad(d, ei, 1, ej)
                q.small[("f", i, j)] = quad(d, fi, 1, fj)
                q.small[("h", i, j)] = quad(d, ei, 1, fj)
                q.large[("E", i, j)] = (quad(d, ei, 2, ej) + quad(d, ej, 2, ei)) * half
                q.large[("F", i, j)] = (quad(d, fi, 2, fj) + quad(d, fj, 2, fi)) * half
                q.large[("H", i, j)] = (quad(d, ei, 2, fj) + quad(d, fj, 2, ei)) * half
        q.omega = omega(d)
        q.check()
        return q

    def check(self) -> None:
        d = self.d
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                if self.small[("e", i, j)] != -self.small[("e", j, i)]:
                    raise AssertionError(f"e^{i}{j} is not antisymmetric")
                if self.small[("f", i, j)] != -self.small[("f", j, i)]:
                    raise AssertionError(f"f^{i}{j} is not antisymmetric")
                for t in "EF":
                    if self.large[(t, i, j)] != self.large[(t, j, i)]:
                        raise AssertionError(f"{t}^{i}{j} is not symmetric")
        tot = State.zero(d)
        for i in range(1, d + 1):
            tot = tot + self.small[("h", i, i)]
        if tot != self.omega:
            raise AssertionError("omega differs from the trace of h")

    def items(self) -> List[Tuple[Tuple[str, int, int], State]]:
        return list(self.small.items()) + list(self.large.items())


def generator_label(key: Tuple[str, int, int]) -> str:
    t, i, j = key
    return f"{t}{i}{j}"


# ---------------------------------------------------------------------------
# sp(2d) and signed permutations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpElement:
    tag: str  # H, X, Y, Z, U, V
    i: int
    j: int = 0

    def __str__(self):
        return f"{self.tag}{self.i}{self.j if self.j else ''}"

    def image(self, d: int, g: int) -> List[Tuple[int, int]]:
        """Action on the generator ``x^g`` as ``[(coeff, gen)]``."""
        is_e = g <= d
        k = g if is_e else g - d
        i, j = self.i, self.j
        E = lambda a: a
        F = lambda a: a + d
        out: List[Tuple[int, int]] = []
        if self.tag == "H":
            if k == i:
                out.append((1, E(i)) if is_e else (-1, F(i)))
        elif self.tag == "X":
            if is_e and k == j:
                out.append((1, E(i)))
            if not is_e and k == i:
                out.append((-1, F(j)))
        elif self.tag == "Y":
            if not is_e:
                if k == j:
                    out.append((1, E(i)))
                if k == i:
                    out.append((1, E(j)))
        elif self.tag == "Z":
            if is_e:
                if k == j:
                    out.append((1, F(i)))
                if k == i:
                    out.append((1, F(j)))
        elif self.tag == "U":
            if not is_e and k == i:
                out.append((1, E(i)))
        elif self.tag == "V":
            if is_e and k == i:
                out.append((1, F(i)))
        else:
            raise ValueError(f"unknown sp tag {self.tag}")
        return out

    def matrix(self, d: int) -> List[List[int]]:
        """Matrix on the generator basis e^1..e^d, f^1..f^d (columns = inputs)."""
        m = [[0] * (2 * d) for _ in range(2 * d)]
        for g in range(1, 2 * d + 1):
            for c, h in self.image(d, g):
                m[h - 1][g - 1] += c
        return m


def sp_basis(d: int) -> List[SpElement]:
    out = [SpElement("H", i) for i in range(1, d + 1)]
    out += [SpElement("X", i, j) for i in range(1, d + 1) for j in range(1, d + 1) if i != j]
    out += [SpElement("Y", i, j) for i in range(1, d + 1) for j in range(i + 1, d + 1)]
    out += [SpElement("Z", i, j) for i in range(1, d + 1) for j in range(i + 1, d + 1)]
    out += [SpElement("U", i) for i in range(1, d + 1)]
    out += [SpElement("V", i) for i in range(1, d + 1)]
    return out


def _derive_terms(d: int, sector: Sector, img, terms: Terms) -> Terms:
    """Leibniz extension of a generator map ``img(g) -> [(c, h)]``."""
    G = 2 * d
    out: Terms = {}
    for b, v in terms.items():
        for bit in iter_bits(b):
            g = G - bit % G
            level_part = bit - bit % G
            for c, h in img(g):
                nb = level_part + (G - h)
                rest = b ^ (1 << bit)
                if rest >> nb & 1:
                    continue
                # replace in place: the new mode takes the old slot, then sorts
                lo = min(bit, nb)
                hi = max(bit, nb)
                between = (rest >> (lo + 1)) & ((1 << (hi - lo - 1)) - 1) if hi > lo else 0
                s = -1 if between.bit_count() & 1 else 1
                key = rest | (1 << nb)
                nv = out.get(key, 0) + s * c * v
                if nv:
                    out[key] = nv
                else:
                    out.pop(key, None)
    return out


def sp_derivation(x: SpElement, s: State) -> State:
    return State(s.d, s.sector, _derive_terms(s.d, s.sector, lambda g: x.image(s.d, g), s.terms), check=False)


def relabel(s: State, gmap: Dict[int, Tuple[int, int]]) -> State:
    """Apply a signed generator relabeling ``g -> sign * x^{g'}`` (an automorphism)."""
    d = s.d
    G = 2 * d
    out: Terms = {}
    for b, v in s.terms.items():
        sign = 1
        idx = []
        for bit in iter_bits(b):
            g = G - bit % G
            sg, h = gmap[g]
            sign *= sg
            idx.append(bit - bit % G + (G - h))
        inv = 0
        for p in range(len(idx)):
            for q in range(p + 1, len(idx)):
                if idx[p] < idx[q]:
                    inv += 1
        nb = 0
        for i in idx:
            nb |= 1 << i
        c = -sign * v if inv & 1 else sign * v
        nv = out.get(nb, 0) + c
        if nv:
            out[nb] = nv
        else:
            out.pop(nb, None)
    return State(d, s.sector, out, check=False)


def tau_map(d: int, i: int) -> Dict[int, Tuple[int, int]]:
    """``e^i -> -f^i, f^i -> e^i``, identity elsewhere."""
    m = {g: (1, g) for g in range(1, 2 * d + 1)}
    m[i] = (-1, i + d)
    m[i + d] = (1, i)
    return m


def perm_map(d: int, sigma: Sequence[int]) -> Dict[int, Tuple[int, int]]:
    """``e^i -> e^{sigma(i)}, f^i -> f^{sigma(i)}`` with ``sigma`` 1-based."""
    m = {}
    for i in range(1, d + 1):
        m[i] = (1, sigma[i - 1])
        m[i + d] = (1, sigma[i - 1] + d)
    return m


def compose_maps(d: int, first, second) -> Dict[int, Tuple[int, int]]:
    """Relabeling ``second o first``."""
    out = {}
    for g in range(1, 2 * d + 1):
        s1, h = first[g]
        s2, k = second[h]
        out[g] = (s1 * s2, k)
    return out


def dominant_map(d: int, charge: Sequence[int]) -> Tuple[Tuple[int, ...], Dict[int, Tuple[int, int]]]:
    """Automorphism taking a charge vector to its dominant representative.

    The signed permutations generated by ``tau_i`` and index permutations act
    on charges ``(#e^i - #f^i)`` by sign changes and permutations; the
    dominant form is sorted by decreasing absolute value, all entries >= 0.
    """
    gmap = {g: (1, g) for g in range(1, 2 * d + 1)}
    c = list(charge)
    for i in range(1, d + 1):
        if c[i - 1] < 0:
            gmap = compose_maps(d, gmap, tau_map(d, i))
            c[i - 1] = -c[i - 1]
    order = sorted(range(d), key=lambda k: (-c[k], k))
    sigma = [0] * d
    for new, old in enumerate(order):
        sigma[old] = new + 1
    gmap = compose_maps(d, gmap, perm_map(d, sigma))
    return tuple(sorted(c, reverse=True)), gmap


def orbit_size(charge: Sequence[int]) -> int:
    """Number of charges related to a dominant one by signed permutations."""
    d = len(charge)
    n = _fact(d)
    for k, grp in itertools.groupby(sorted(charge)):
        n //= _fact(len(list(grp)))
    nz = sum(1 for c in charge if c)
    return n * 2 ** nz


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int = 0
    witness: Optional[str] = None

    def __bool__(self):
        return self.passed


def states_upto(d: int, max_weight: int, sector: Sector = Sector.UNTWISTED) -> List[State]:
    out = []
    for tw in range(0, 2 * max_weight + 1):
        for b in basis_bits(d, sector, tw, False):
            out.append(State(d, sector, {b: 1}, check=False))
    return out


def lambda_bracket_check(cfg: AlgebraConfig, max_depth: int = 6, max_weight: int = 6, flip_pairing: bool = False) -> CheckReport:
    """Check ``{x_m, y_n} = contraction`` as operators on low-weight states."""
    d = cfg.d
    ker = ModeKernel(d, Sector.UNTWISTED, pairing_sign=-1 if flip_pairing else 1)
    states = [b for tw in range(0, 2 * max_weight + 1, 2) for b in basis_bits(d, Sector.UNTWISTED, tw, False)]
    depths = range(-max_depth, max_depth + 1)
    checked = 0
    for g, h in itertools.product(range(1, 2 * d + 1), repeat=2):
        for m in depths:
            for n in depths:
                ref = contraction(ModeKey(g, m), ModeKey(h, n), d)
                for b in states:
                    t = {b: 1}
                    lhs: Terms = {}
                    _acc(lhs, ker.act_int(g, m, ker.act_int(h, n, t)))
                    _acc(lhs, ker.act_int(h, n, ker.act_int(g, m, t)))
                    expect = {b: ref} if ref else {}
                    checked += 1
                    if lhs != expect:
                        return CheckReport(
                            "lambda-bracket",
                            False,
                            checked,
                            f"{gen_name(d, g)}({m}), {gen_name(d, h)}({n}) on {State(d, Sector.UNTWISTED, {b: 1}, check=False)}",
                        )
    return CheckReport("lambda-bracket", True, checked)


def virasoro_closure_check(d: int, max_weight: int = 6, mode_range: int = 3) -> CheckReport:
    """``[L(m), L(n)] = (m-n) L(m+n) + (m^3-m)/12 * c * delta`` with ``c = -2d``."""
    ker = kernel(d)
    w = omega(d).terms
    states = [b for tw in range(0, 2 * max_weight + 1, 2) for b in basis_bits(d, Sector.UNTWISTED, tw, False)]
    c = -2 * d

    def L(n, t):
        return ker.state_product(w, n + 1, t)

    checked = 0
    rng = range(-mode_range, mode_range + 1)
    for b in states:
        t = {b: 1}
        Lt = {n: L(n, t) for n in rng}
        for m in rng:
            for n in rng:
                lhs: Terms = {}
                _acc(lhs, L(m, Lt[n]))
                _acc(lhs, L(n, Lt[m]), -1)
                rhs: Terms = {}
                if abs(m + n) <= mode_range:
                    _acc(rhs, Lt[m + n], m - n)
                else:
                    _acc(rhs, L(m + n, t), m - n)
                if m + n == 0:
                    _acc(rhs, t, Fraction((m ** 3 - m) * c, 12))
                checked += 1
                if lhs != rhs:
                    return CheckReport(
                        "virasoro", False, checked, f"[L({m}),L({n})] on {State(d, Sector.UNTWISTED, t, check=False)}"
                    )
    return CheckReport("virasoro", True, checked)


def _parity(t: Terms) -> int:
    ps = {b.bit_count() & 1 for b in t}
    if len(ps) != 1:
        raise ValueError("expected a state of definite parity")
    return ps.pop()


def skew_symmetry_check(d: int, pairs: int = 20, max_weight: int = 4, max_n: int = 3, seed: int = 0) -> CheckReport:
    """``a_(n) b = -(-1)^{|a||b|} sum_j (-1)^{n+j} L(-1)^j / j! (b_(n+j) a)``."""
    rng = random.Random(seed)
    ker = kernel(d)
    pool = [b for tw in range(0, 2 * max_weight + 1, 2) for b in basis_bits(d, Sector.UNTWISTED, tw, False)]
    w = omega(d).terms
    checked = 0
    for _ in range(pairs):
        a = _random_homogeneous(rng, d, pool)
        b = _random_homogeneous(rng, d, pool)
        pa, pb = _parity(a), _parity(b)
        wa = twice_osc_weight(d, Sector.UNTWISTED, next(iter(a))) // 2
        wb = twice_osc_weight(d, Sector.UNTWISTED, next(iter(b))) // 2
        for n in range(-1, max_n + 1):
            lhs = ker.state_product(a, n, b)
            rhs: Terms = {}
            j = 0
            while True:
                t = ker.state_product(b, n + j, a)
                if not t and n + j > wa + wb:
                    break
                for _k in range(j):
                    t = ker.state_product(w, 0, t)
                sgn = -1 if (pa * pb) & 1 else 1
                _acc(rhs, t, Fraction(-sgn * (-1 if (n + j) & 1 else 1), _fact(j)))
                j += 1
            checked += 1
            if lhs != rhs:
                return CheckReport("skew-symmetry", False, checked, f"n={n}")
    return CheckReport("skew-symmetry", True, checked)


def _random_homogeneous(rng: random.Random, d: int, pool: Sequence[int]) -> Terms:
    base = rng.choice(pool)
    tw = twice_osc_weight(d, Sector.UNTWISTED, base)
    par = base.bit_count() & 1
    same = [b for b in basis_bits(d, Sector.UNTWISTED, tw, False) if b.bit_count() & 1 == par]
    out: Terms = {}
    for b in rng.sample(same, min(3, len(same))):
        c = rng.randint(-3, 3) or 1
        out[b] = c
    return out


def commutator_formula_check(d: int, max_weight: int = 4, mode_range: int = 2) -> CheckReport:
    """``[a_m, b_n] = sum_k C(m,k) (a_(k) b)_(m+n-k)`` for quadratic generators."""
    ker = kernel(d)
    gens = []
    for _, s in QuadraticGenerators.build(d).items():
        if s.terms and s.terms not in gens:
            gens.append(s.terms)
    states = [b for tw in range(0, 2 * max_weight + 1, 2) for b in basis_bits(d, Sector.UNTWISTED, tw, False)]
    memo: Dict[Tuple[int, int, int], Terms] = {}

    def op(gi: int, m: int, terms: Terms) -> Terms:
        out: Terms = {}
        for c_bits, v in terms.items():
            key = (gi, m, c_bits)
            r = memo.get(key)
            if r is None:
                r = memo[key] = ker.state_product(gens[gi], m, {c_bits: 1})
            _acc(out, r, v)
        return out

    checked = 0
    rng = range(-mode_range, mode_range + 1)
    for ai, a in enumerate(gens):
        for bi, b in enumerate(gens):
            prods = {k: p for k in range(7) if (p := ker.state_product(a, k, b))}
            for t_bits in states:
                t = {t_bits: 1}
                for m in rng:
                    for n in rng:
                        lhs: Terms = {}
                        _acc(lhs, op(ai, m, op(bi, n, t)))
                        _acc(lhs, op(bi, n, op(ai, m, t)), -1)
                        rhs: Terms = {}
                        for k, p in prods.items():
                            _acc(rhs, ker.state_product(p, m + n - k, t), gbinom(m, k))
                        checked += 1
                        if lhs != rhs:
                            return CheckReport("commutator", False, checked, f"generators {ai},{bi} modes {m},{n}")
    return CheckReport("commutator", True, checked)
