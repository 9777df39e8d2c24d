"""Result record shared by every check."""

import math
from dataclasses import dataclass, field
from typing import Optional


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    name: str
    passed: bool
    statistic: float = 0.0
    p_value: Optional[float] = None
    max_deviation: float = 0.0
    cases_checked: int = 0
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """JSON-ready view; non-finite numbers become ``None``."""
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "statistic": _num(self.statistic),
            "p_value": _num(self.p_value),
            "max_deviation": _num(self.max_deviation),
            "cases_checked": int(self.cases_checked),
            "warnings": [str(w) for w in self.warnings],
            "details": _jsonable(self.details),
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    try:
        return _num(v)
    except (TypeError, ValueError):
        return str(v)
