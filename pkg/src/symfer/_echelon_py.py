"""Pure-Python incremental echelon basis over Q (fraction-free).

Rows are stored as primitive integer vectors with a positive leading
entry.  Elimination uses ``w <- a*w - b*p`` with ``a, b`` the cofactors of
the two leading entries, followed by content removal, so no denominators
ever appear.  This module is the fallback for the compiled backend in
``_echelon_ext`` and must stay semantically identical to it.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from math import gcd
from typing import Dict, List, Sequence, Tuple


def _content(row: Dict[int, int]) -> int:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return 1
    return g


class Echelon:
    backend = "python"

    def __init__(self, ncols: int):
        self.ncols = int(ncols)
        self._piv: Dict[int, Dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self._piv)

    def is_full(self) -> bool:
        return len(self._piv) == self.ncols

    def pivot_columns(self) -> List[int]:
        return sorted(self._piv)

    def pivot_rows(self) -> List[Tuple[List[int], List[int]]]:
        out = []
        for c in sorted(self._piv):
            r = self._piv[c]
            ks = sorted(r)
            out.append((ks, [r[k] for k in ks]))
        return out

    def _check(self, cols: Sequence[int]):
        prev = -1
        for c in cols:
            if not 0 <= c < self.ncols:
                raise IndexError(f"column {c} outside 0..{self.ncols - 1}")
            if c <= prev:
                raise ValueError("columns must be strictly increasing")
            prev = c

    def add(self, cols: Sequence[int], vals: Sequence[int]) -> bool:
        """Insert an integer row; return True iff it enlarged the span."""
        self._check(cols)
        w = {c: v for c, v in zip(cols, vals) if v}
        piv = self._piv
        while w:
            c = min(w)
            p = piv.get(c)
            if p is None:
                g = _content(w)
                if w[c] < 0:
                    g = -g
                if g != 1:
                    w = {k: v // g for k, v in w.items()}
                piv[c] = w
                return True
            w = self._eliminate(w, p, c)
        return False

    @staticmethod
    def _eliminate(w: Dict[int, int], p: Dict[int, int], c: int) -> Dict[int, int]:
        a, b = p[c], w[c]
        g = gcd(a, b)
        a //= g
        b //= g
        if a != 1:
            w = {k: a * v for k, v in w.items()}
        for k, v in p.items():
            nv = w.get(k, 0) - b * v
            if nv:
                w[k] = nv
            else:
                w.pop(k, None)
        g = _content(w)
        if g > 1:
            w = {k: v // g for k, v in w.items()}
        return w

    def reduce(self, cols: Sequence[int], vals: Sequence[int]) -> Tuple[List[int], List[int], int, int]:
        """Full normal form against the pivots.

        Returns ``(cols, vals, num, den)``: the residual equals the integer
        row divided by ``num/den``.  The residual has no entry in any pivot
        column, so it is a canonical representative modulo the span.
        """
        self._check(cols)
        w = {c: v for c, v in zip(cols, vals) if v}
        scale = Fraction(1)
        piv = self._piv
        heap = [k for k in w if k in piv]
        heapq.heapify(heap)
        while heap:
            c = heapq.heappop(heap)
            if c not in w:
                continue
            p = piv[c]
            a, b = p[c], w[c]
            g = gcd(a, b)
            a //= g
            b //= g
            if a != 1:
                w = {k: a * v for k, v in w.items()}
                scale *= a
            for k, v in p.items():
                nv = w.get(k, 0) - b * v
                if nv:
                    if k not in w and k in piv:
                        heapq.heappush(heap, k)
                    w[k] = nv
                else:
                    w.pop(k, None)
            g = _content(w)
            if g > 1:
                w = {k: v // g for k, v in w.items()}
                scale /= g
        ks = sorted(w)
        return ks, [w[k] for k in ks], scale.numerator, scale.denominator

    def contains(self, cols: Sequence[int], vals: Sequence[int]) -> bool:
        self._check(cols)
        w = {c: v for c, v in zip(cols, vals) if v}
        piv = self._piv
        while w:
            c = min(w)
            p = piv.get(c)
            if p is None:
                return False
            w = self._eliminate(w, p, c)
        return True
