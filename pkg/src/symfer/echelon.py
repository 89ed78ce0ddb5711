"""Backend selection for the incremental echelon basis.

The compiled GMP kernel is used when importable; ``SYMFER_PURE_PYTHON=1``
forces the Python implementation.  Both expose the same ``Echelon`` class
over integer rows; :class:`RationalEchelon` adds the Fraction-facing layer
the rest of the package uses.
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import lcm
from typing import Dict, Tuple

from . import _echelon_py

_compiled = None
if not os.environ.get("SYMFER_PURE_PYTHON"):
    try:
        from . import _echelon_ext as _compiled
    except ImportError:  # pragma: no cover - depends on build
        _compiled = None

IntEchelon = _compiled.Echelon if _compiled is not None else _echelon_py.Echelon
BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> Dict[str, type]:
    out = {"python": _echelon_py.Echelon}
    if _compiled is not None:
        out["compiled"] = _compiled.Echelon
    return out


def integerize(v: dict) -> Tuple[list, list, int]:
    """Sorted integer row proportional to ``v`` and the scale used."""
    ks = sorted(k for k, c in v.items() if c)
    den = 1
    for k in ks:
        c = v[k]
        if isinstance(c, Fraction) and c.denominator != 1:
            den = lcm(den, c.denominator)
    if den == 1:
        return ks, [int(v[k]) for k in ks], 1
    return ks, [int(v[k] * den) for k in ks], den


class RationalEchelon:
    """Echelon basis taking ``{col: rational}`` rows."""

    def __init__(self, ncols: int, backend: str = None):
        cls = IntEchelon if backend is None else available_backends()[backend]
        self._e = cls(ncols)
        self.ncols = ncols

    @property
    def backend(self) -> str:
        return self._e.backend

    @property
    def rank(self) -> int:
        return self._e.rank

    def is_full(self) -> bool:
        return self._e.is_full()

    def add(self, v: dict) -> bool:
        ks, vs, _ = integerize(v)
        return self._e.add(ks, vs)

    def contains(self, v: dict) -> bool:
        ks, vs, _ = integerize(v)
        return self._e.contains(ks, vs)

    def reduce(self, v: dict) -> Dict[int, Fraction]:
        ks, vs, den = integerize(v)
        rk, rv, num, sden = self._e.reduce(ks, vs)
        # residual_int = (num/sden) * den * residual_true
        f = Fraction(sden, num * den)
        return {k: c * f for k, c in zip(rk, rv)}

    def pivot_columns(self):
        return self._e.pivot_columns()
