"""Pass/fail report records shared by the verification suites and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import __version__


def jsonable(x: Any) -> Any:
    """Exact JSON form: rationals become ``"p/q"`` strings."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


@dataclass
class Item:
    name: str
    expected: Any
    actual: Any
    passed: bool

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "expected": jsonable(self.expected), "actual": jsonable(self.actual), "pass": bool(self.passed)}


@dataclass
class Report:
    suite: str
    d: int
    params: Dict[str, Any] = field(default_factory=dict)
    items: List[Item] = field(default_factory=list)
    inconclusive: bool = False
    notes: List[str] = field(default_factory=list)
    elapsed_ms: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, expected: Any, actual: Any, passed: Optional[bool] = None) -> Item:
        if passed is None:
            passed = expected == actual
        it = Item(name, expected, actual, bool(passed))
        self.items.append(it)
        return it

    @property
    def passed(self) -> bool:
        return bool(self.items) and all(it.passed for it in self.items) and not self.inconclusive

    def failures(self) -> List[Item]:
        return [it for it in self.items if not it.passed]

    def exit_code(self) -> int:
        if self.inconclusive:
            return 3
        return 0 if self.passed else 1

    def to_json(self) -> Dict[str, Any]:
        out = {
            "suite": self.suite,
            "d": self.d,
            "params": jsonable(self.params),
            "items": [it.to_json() for it in self.items],
            "pass": self.passed,
            "elapsed_ms": self.elapsed_ms,
            "version": __version__,
        }
        if self.inconclusive:
            out["inconclusive"] = True
        if self.notes:
            out["notes"] = list(self.notes)
        if self.metadata:
            out["metadata"] = jsonable(self.metadata)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "Report":
        rep = cls(obj["suite"], obj["d"], dict(obj.get("params", {})))
        for it in obj.get("items", []):
            rep.items.append(Item(it["name"], it["expected"], it["actual"], it["pass"]))
        rep.inconclusive = bool(obj.get("inconclusive", False))
        rep.notes = list(obj.get("notes", []))
        rep.elapsed_ms = obj.get("elapsed_ms", 0)
        rep.metadata = dict(obj.get("metadata", {}))
        return rep

    def summary(self) -> str:
        status = "INCONCLUSIVE" if self.inconclusive else ("PASS" if self.passed else "FAIL")
        return f"{self.suite} d={self.d}: {status} ({sum(i.passed for i in self.items)}/{len(self.items)} items)"
