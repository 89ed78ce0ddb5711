"""Fock spaces of the symplectic fermions.

Generators are numbered ``x^1..x^{2d}`` with ``x^i = e^i`` and
``x^{i+d} = f^i``.  A mode ``x^g_{(n)}`` is written ``ModeKey(g, n)``; in a
monomial only creation modes (``n < 0``) and, in the zero-extended sector,
zero modes appear.

Internally a monomial is an ``int`` bitmask.  Every mode gets a *level*
(``-n`` for integral modes, ``-n + 1/2`` for the half-integral twisted ones)
and the bit ``level * 2d + (2d - g)``.  The canonical order of modes
(decreasing ``|n|``, then increasing ``g``, zero modes last) is then simply
decreasing bit index, and fermionic signs become popcounts.
"""

from __future__ import annotations

import enum
import logging
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

log = logging.getLogger(__name__)

CACHE_VERSION = "v1"


class Sector(str, enum.Enum):
    UNTWISTED = "untwisted"
    TWISTED = "twisted"
    ZERO_EXTENDED = "zero_extended"

    def offset(self, d: int) -> Fraction:
        return Fraction(-d, 8) if self is Sector.TWISTED else Fraction(0)


@dataclass(frozen=True)
class AlgebraConfig:
    """Rank ``d`` symplectic fermions with <e^i, f^j> = -delta_ij."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"rank d must be a positive integer, got {self.d!r}")

    @property
    def ngens(self) -> int:
        return 2 * self.d

    def pairing(self, g: int, h: int) -> int:
        return pairing(self.d, g, h)

    def gen_name(self, g: int) -> str:
        return gen_name(self.d, g)


def pairing(d: int, g: int, h: int) -> int:
    """Symplectic form on generator indices."""
    if g <= d < h and h - d == g:
        return -1
    if h <= d < g and g - d == h:
        return 1
    return 0


def partner(d: int, g: int) -> int:
    return g + d if g <= d else g - d


def gen_name(d: int, g: int) -> str:
    return f"e{g}" if g <= d else f"f{g - d}"


@dataclass(frozen=True, order=True)
class ModeKey:
    gen: int
    depth: Fraction

    def __init__(self, gen: int, depth):
        object.__setattr__(self, "gen", int(gen))
        object.__setattr__(self, "depth", Fraction(depth))

    def __repr__(self):
        return f"ModeKey({self.gen}, {self.depth})"


@dataclass(frozen=True)
class Monomial:
    modes: Tuple[ModeKey, ...]

    def __len__(self):
        return len(self.modes)


# ---------------------------------------------------------------------------
# bit encoding
# ---------------------------------------------------------------------------

def level_of(sector: Sector, depth: Fraction) -> int:
    depth = Fraction(depth)
    if sector is Sector.TWISTED:
        lv = Fraction(1, 2) - depth
        if lv.denominator != 1 or lv < 1:
            raise ValueError(f"twisted creation modes are half-odd and <= -1/2, got {depth}")
        return int(lv)
    if depth.denominator != 1:
        raise ValueError(f"{sector.value} modes are integral, got {depth}")
    if depth > 0:
        raise ValueError(f"annihilation mode (depth {depth}) cannot appear in a monomial")
    if depth == 0 and sector is not Sector.ZERO_EXTENDED:
        raise ValueError("zero modes only live in the zero_extended sector")
    return int(-depth)


def depth_of(sector: Sector, level: int) -> Fraction:
    if sector is Sector.TWISTED:
        return Fraction(1, 2) - level
    return Fraction(-level)


def mode_bit(d: int, sector: Sector, key: ModeKey) -> int:
    G = 2 * d
    if not 1 <= key.gen <= G:
        raise ValueError(f"generator index {key.gen} outside 1..{G}")
    return level_of(sector, key.depth) * G + (G - key.gen)


def bit_mode(d: int, sector: Sector, bit: int) -> ModeKey:
    G = 2 * d
    return ModeKey(G - bit % G, depth_of(sector, bit // G))


def iter_bits(bits: int):
    """Set bit indices, highest (= first in canonical order) first."""
    while bits:
        b = bits.bit_length() - 1
        yield b
        bits ^= 1 << b


def bits_to_monomial(d: int, sector: Sector, bits: int) -> Monomial:
    return Monomial(tuple(bit_mode(d, sector, b) for b in iter_bits(bits)))


def monomial_to_bits(d: int, sector: Sector, mono: Monomial) -> int:
    sign, bits = _canonical_bits(d, sector, mono.modes)
    if sign != 1:
        raise ValueError(f"monomial {mono} is not in canonical order")
    return bits


def _canonical_bits(d: int, sector: Sector, modes: Sequence[ModeKey]) -> Tuple[int, int]:
    idx = [mode_bit(d, sector, m) for m in modes]
    if len(set(idx)) != len(idx):
        return 0, 0
    inv = 0
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            if idx[a] < idx[b]:
                inv += 1
    bits = 0
    for i in idx:
        bits |= 1 << i
    return (-1 if inv & 1 else 1), bits


def canonical_form(raw: Sequence[ModeKey], cfg: AlgebraConfig, sector: Sector = Sector.UNTWISTED):
    """Sort a product of creation/zero modes into canonical order.

    Returns ``(sign, Monomial)``, or ``None`` when a mode repeats (odd
    generators square to zero).  Annihilation modes are rejected.
    """
    sign, bits = _canonical_bits(cfg.d, sector, raw)
    if sign == 0:
        return None
    return sign, bits_to_monomial(cfg.d, sector, bits)


def twice_osc_weight(d: int, sector: Sector, bits: int) -> int:
    """2 x oscillator weight (an integer in every sector)."""
    G = 2 * d
    tw = 0
    for b in iter_bits(bits):
        lv = b // G
        tw += 2 * lv - 1 if sector is Sector.TWISTED else 2 * lv
    return tw


def osc_weight(d: int, sector: Sector, bits: int) -> Fraction:
    return Fraction(twice_osc_weight(d, sector, bits), 2)


def charge(d: int, bits: int) -> Tuple[int, ...]:
    """Cartan charges (#e^i - #f^i)_i of a monomial."""
    G = 2 * d
    c = [0] * d
    for b in iter_bits(bits):
        g = G - b % G
        if g <= d:
            c[g - 1] += 1
        else:
            c[g - d - 1] -= 1
    return tuple(c)


def parity(bits: int) -> int:
    return bin(bits).count("1") & 1


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------

class State:
    """Finite rational combination of monomials in one sector.

    ``terms`` maps monomial bitmasks to nonzero coefficients (``int`` or
    ``Fraction``).  States are treated as immutable values.
    """

    __slots__ = ("d", "sector", "terms")

    def __init__(self, d: int, sector: Sector, terms: Optional[Dict[int, object]] = None, *, check: bool = True):
        self.d = d
        self.sector = Sector(sector)
        t = {k: v for k, v in (terms or {}).items() if v != 0}
        if check:
            for bits in t:
                if bits < 0:
                    raise ValueError("negative bitmask")
                if self.sector is Sector.UNTWISTED and bits & ((1 << (2 * d)) - 1):
                    raise ValueError("zero modes are not allowed in the untwisted sector")
        self.terms = t

    # -- constructors ---------------------------------------------------------
    @classmethod
    def vacuum(cls, d: int, sector: Sector = Sector.UNTWISTED) -> "State":
        return cls(d, sector, {0: 1}, check=False)

    @classmethod
    def zero(cls, d: int, sector: Sector = Sector.UNTWISTED) -> "State":
        return cls(d, sector, {}, check=False)

    @classmethod
    def from_modes(cls, d: int, modes: Sequence[Tuple[int, object]], sector: Sector = Sector.UNTWISTED, coeff=1) -> "State":
        """``x^{g1}_{(n1)} ... x^{gk}_{(nk)} |0>`` from ``[(g1, n1), ...]``."""
        sign, bits = _canonical_bits(d, Sector(sector), [ModeKey(g, n) for g, n in modes])
        if sign == 0:
            return cls.zero(d, sector)
        return cls(d, sector, {bits: sign * coeff}, check=False)

    @classmethod
    def from_monomial(cls, d: int, mono: Monomial, sector: Sector = Sector.UNTWISTED, coeff=1) -> "State":
        return cls(d, sector, {monomial_to_bits(d, Sector(sector), mono): coeff})

    # -- algebra ----------------------------------------------------------------
    def _compat(self, other: "State"):
        if not isinstance(other, State):
            raise TypeError(f"expected State, got {type(other).__name__}")
        if other.d != self.d or other.sector is not self.sector:
            raise ValueError(
                f"mixed states: d={self.d}/{self.sector.value} vs d={other.d}/{other.sector.value}"
            )

    def __add__(self, other: "State") -> "State":
        self._compat(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            nv = t.get(k, 0) + v
            if nv:
                t[k] = nv
            else:
                t.pop(k, None)
        return State(self.d, self.sector, t, check=False)

    def __neg__(self) -> "State":
        return State(self.d, self.sector, {k: -v for k, v in self.terms.items()}, check=False)

    def __sub__(self, other: "State") -> "State":
        return self + (-other)

    def __mul__(self, c) -> "State":
        if isinstance(c, State):
            return NotImplemented
        if c == 0:
            return State.zero(self.d, self.sector)
        return State(self.d, self.sector, {k: c * v for k, v in self.terms.items()}, check=False)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, State):
            return NotImplemented
        return (self.d, self.sector, self.terms) == (other.d, other.sector, other.terms)

    def __hash__(self):
        return hash((self.d, self.sector, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, modes: Sequence[Tuple[int, object]]) -> Fraction:
        sign, bits = _canonical_bits(self.d, self.sector, [ModeKey(g, n) for g, n in modes])
        if sign == 0:
            return Fraction(0)
        return Fraction(sign * self.terms.get(bits, 0))

    def items(self) -> List[Tuple[Monomial, Fraction]]:
        return [
            (bits_to_monomial(self.d, self.sector, b), Fraction(c))
            for b, c in sorted(self.terms.items(), reverse=True)
        ]

    # -- grading ----------------------------------------------------------------
    def weights(self) -> List[Fraction]:
        off = self.sector.offset(self.d)
        return sorted({osc_weight(self.d, self.sector, b) + off for b in self.terms})

    def weight(self) -> Fraction:
        """Conformal weight of a homogeneous state (vacuum-twisted offset included)."""
        ws = self.weights()
        if len(ws) > 1:
            raise ValueError(f"state is not homogeneous: found weights {ws[0]} and {ws[1]}")
        if not ws:
            raise ValueError("the zero state has no weight")
        return ws[0]

    def components(self) -> Dict[Fraction, "State"]:
        off = self.sector.offset(self.d)
        out: Dict[Fraction, Dict[int, object]] = {}
        for b, c in self.terms.items():
            out.setdefault(osc_weight(self.d, self.sector, b) + off, {})[b] = c
        return {w: State(self.d, self.sector, t, check=False) for w, t in sorted(out.items())}

    def parity(self) -> int:
        ps = {parity(b) for b in self.terms}
        if len(ps) > 1:
            raise ValueError("state mixes parities")
        return ps.pop() if ps else 0

    # -- display ----------------------------------------------------------------
    def __repr__(self):
        if not self.terms:
            return "0"
        vac = "1θ" if self.sector is Sector.TWISTED else "1"
        parts = []
        for b, c in sorted(self.terms.items(), reverse=True):
            mono = " ".join(
                f"{gen_name(self.d, m.gen)}[{m.depth}]" for m in bits_to_monomial(self.d, self.sector, b).modes
            )
            parts.append(f"{c}*{mono + ' ' if mono else ''}{vac}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# basis enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _subsets(G: int) -> Tuple[Tuple[int, int], ...]:
    """All generator subsets as (pattern, size), pattern on bits 0..G-1."""
    return tuple((p, bin(p).count("1")) for p in range(1 << G))


@lru_cache(maxsize=4096)
def basis_bits(d: int, sector: Sector, twice_osc: int, even_only: bool) -> Tuple[int, ...]:
    """Canonical monomials of the given doubled oscillator weight.

    Sorted by decreasing bitmask, which is the lexicographic order of the
    canonical mode sequences with deeper modes first.
    """
    sector = Sector(sector)
    G = 2 * d
    subs = _subsets(G)
    if twice_osc < 0:
        return ()
    unit = (lambda lv: 2 * lv - 1) if sector is Sector.TWISTED else (lambda lv: 2 * lv)
    out: List[int] = []

    def rec(level: int, rem: int, acc: int):
        if rem == 0:
            out.append(acc)
            return
        if level < 1:
            return
        u = unit(level)
        for pat, k in subs:
            if k * u > rem:
                continue
            # levels below must be able to absorb the remainder
            r2 = rem - k * u
            if r2 and level == 1:
                continue
            rec(level - 1, r2, acc | (pat << (level * G)))

    top = (twice_osc + 1) // 2 if sector is Sector.TWISTED else twice_osc // 2
    if sector is not Sector.TWISTED and twice_osc % 2:
        return ()
    rec(top, twice_osc, 0)
    if sector is Sector.ZERO_EXTENDED:
        out = [b | p for b in out for p, _ in subs]
    if even_only:
        out = [b for b in out if not parity(b)]
    return tuple(sorted(set(out), reverse=True))


@lru_cache(maxsize=4096)
def basis_by_charge(d: int, sector: Sector, twice_osc: int, even_only: bool) -> Dict[Tuple[int, ...], Tuple[int, ...]]:
    out: Dict[Tuple[int, ...], List[int]] = {}
    for b in basis_bits(d, sector, twice_osc, even_only):
        out.setdefault(charge(d, b), []).append(b)
    return {c: tuple(v) for c, v in out.items()}


def _twice_osc_for(cfg: AlgebraConfig, sector: Sector, w) -> int:
    osc = Fraction(w) - sector.offset(cfg.d)
    t = 2 * osc
    if t.denominator != 1 or t < 0:
        raise ValueError(f"weight {w} not admissible for the {sector.value} sector")
    if sector is not Sector.TWISTED and osc.denominator != 1:
        raise ValueError(f"weight {w} not admissible for the {sector.value} sector")
    return int(t)


def enumerate_basis(cfg: AlgebraConfig, sector: Sector, w, even_only: bool = False) -> List[Monomial]:
    """All canonical monomials of conformal weight ``w`` in ``sector``."""
    sector = Sector(sector)
    t = _twice_osc_for(cfg, sector, w)
    return [bits_to_monomial(cfg.d, sector, b) for b in basis_bits(cfg.d, sector, t, bool(even_only))]


def fermion_count_series(d: int, max_weight: int) -> List[int]:
    """Coefficients of prod_{n>=1} (1+q^n)^{2d} up to q^max_weight."""
    series = [0] * (max_weight + 1)
    series[0] = 1
    for n in range(1, max_weight + 1):
        for _ in range(2 * d):
            for w in range(max_weight, n - 1, -1):
                series[w] += series[w - n]
    return series


# ---------------------------------------------------------------------------
# on-disk basis cache
# ---------------------------------------------------------------------------

def _fmt_q(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def cache_header(cfg: AlgebraConfig, sector: Sector, w, even_only: bool) -> str:
    return (
        f"symfer-basis {CACHE_VERSION} d={cfg.d} sector={Sector(sector).value} "
        f"w={_fmt_q(Fraction(w))} parity={'even' if even_only else 'all'}"
    )


def format_monomial(mono: Monomial) -> str:
    return ",".join(f"g{m.gen}:{_fmt_q(m.depth)}" for m in mono.modes)


def parse_monomial(line: str) -> Monomial:
    if not line:
        return Monomial(())
    modes = []
    for tok in line.split(","):
        g, q = tok.split(":")
        if not g.startswith("g"):
            raise ValueError(f"bad token {tok!r}")
        num, den = q.split("/")
        modes.append(ModeKey(int(g[1:]), Fraction(int(num), int(den))))
    return Monomial(tuple(modes))


def _cache_path(cache_dir: Path, cfg: AlgebraConfig, sector: Sector, w, even_only: bool) -> Path:
    w = Fraction(w)
    return Path(cache_dir) / (
        f"basis_d{cfg.d}_{Sector(sector).value}_w{w.numerator}-{w.denominator}_"
        f"{'even' if even_only else 'all'}.txt"
    )


def basis_cache_io(cfg: AlgebraConfig, sector: Sector, w, even_only: bool = False, cache_dir=None) -> List[Monomial]:
    """Read a cached basis if valid, else enumerate and write it atomically."""
    sector = Sector(sector)
    if cache_dir is None:
        cache_dir = os.environ.get("SYMFER_CACHE")
    if cache_dir is None:
        return enumerate_basis(cfg, sector, w, even_only)
    path = _cache_path(Path(cache_dir), cfg, sector, w, even_only)
    header = cache_header(cfg, sector, w, even_only)
    if path.exists():
        try:
            text = path.read_text(encoding="utf-8")
            lines = text.split("\n")
            if lines[0] != header or lines[-1] != "":
                raise ValueError(f"header mismatch: {lines[0]!r}")
            monos = [parse_monomial(ln) for ln in lines[1:-1]]
            # validates canonical order and sector admissibility
            for m in monos:
                monomial_to_bits(cfg.d, sector, m)
            return monos
        except Exception as exc:  # corrupt or stale: rebuild
            log.warning("basis cache %s unusable (%s); recomputing", path, exc)
    monos = enumerate_basis(cfg, sector, w, even_only)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = header + "\n" + "".join(format_monomial(m) + "\n" for m in monos)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".basis-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return monos
