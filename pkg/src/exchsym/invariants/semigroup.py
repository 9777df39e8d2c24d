"""Streaming permutation-invariant statistics from commutative semigroups.

Sums and products are accumulated as exact rationals so that folding is
independent of order and ``merge(fold(a), fold(b)) == fold(a + b)`` holds
exactly, not just up to rounding.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional, Sequence

from .measures import EmpiricalMeasure, empirical_measure

OPS = ("sum", "max", "min", "product", "multiset")


class EmptyFoldError(ValueError):
    """Folding an empty input under an operation without an identity."""


@dataclass(frozen=True)
class SemigroupStat:
    op: str
    value: Any

    def result(self):
        """Float (or tuple of floats) view of the accumulated value."""
        if self.op in ("sum", "product"):
            if isinstance(self.value, tuple):
                return tuple(float(v) for v in self.value)
            return float(self.value)
        return self.value


def _lift(op, e):
    if op == "multiset":
        return empirical_measure([e])
    if op in ("sum", "product"):
        if isinstance(e, (tuple, list)):
            return tuple(Fraction(float(v)) for v in e)
        return Fraction(float(e))
    return tuple(float(v) for v in e) if isinstance(e, (tuple, list)) else float(e)


def _combine(op, a, b):
    if op == "multiset":
        return EmpiricalMeasure(tuple(sorted(a.entries + b.entries)))
    if op == "max":
        return max(a, b)
    if op == "min":
        return min(a, b)
    if isinstance(a, tuple):
        return tuple(u + v if op == "sum" else u * v for u, v in zip(a, b))
    return a + b if op == "sum" else a * b


def _identity(op):
    if op == "sum":
        return Fraction(0)
    if op == "product":
        return Fraction(1)
    if op == "multiset":
        return EmpiricalMeasure(())
    return None


def semigroup_fold(x: Sequence, encode: Optional[Callable] = None, op: str = "sum") -> SemigroupStat:
    """Fold ``encode(x_i)`` with ``op``; invariant under any reordering of ``x``."""
    if op not in OPS:
        raise ValueError(f"unknown semigroup op {op!r}")
    items = [encode(e) if encode else e for e in x]
    if not items:
        ident = _identity(op)
        if ident is None:
            raise EmptyFoldError(f"{op} of an empty sequence is undefined")
        return SemigroupStat(op, ident)
    acc = _lift(op, items[0])
    for e in items[1:]:
        acc = _combine(op, acc, _lift(op, e))
    return SemigroupStat(op, acc)


def semigroup_merge(a: SemigroupStat, b: SemigroupStat) -> SemigroupStat:
    """Combine two folded statistics of the same operation."""
    if a.op != b.op:
        raise ValueError(f"cannot merge {a.op} with {b.op}")
    if a.op in ("sum", "product"):
        # the empty fold is a scalar identity; it must also merge with vector values
        ident = _identity(a.op)
        if a.value == ident:
            return b
        if b.value == ident:
            return a
    return SemigroupStat(a.op, _combine(a.op, a.value, b.value))
