"""Exact check that the conditional law given a statistic is the orbit law."""

import itertools
from typing import Callable, Sequence

import numpy as np

from ..groups import GroupSpec
from ..invariants import orbit_law_pmf
from .exhaustive import _hashable
from .report import TestReport


def iid_law(probs: dict) -> Callable:
    """Product law with marginal ``probs`` (value -> probability)."""
    def pmf(x):
        return float(np.prod([probs.get(v, 0.0) for v in x]))
    return pmf


def mixture_law(weights: Sequence[float], components: Sequence[dict]) -> Callable:
    """Mixture of i.i.d. laws; exchangeable."""
    parts = [iid_law(c) for c in components]

    def pmf(x):
        return float(sum(w * f(x) for w, f in zip(weights, parts)))
    return pmf


def markov_law(initial: dict, transition: dict) -> Callable:
    """Markov chain law; ``transition[a][b]`` is P(next = b | current = a).
    Not exchangeable in general (negative control)."""
    def pmf(x):
        p = initial.get(x[0], 0.0)
        for a, b in zip(x[:-1], x[1:]):
            p *= transition.get(a, {}).get(b, 0.0)
        return float(p)
    return pmf


def sufficiency_test(law: Callable, M: Callable, spec: GroupSpec, alphabet, tol: float = 1e-12,
                     name: str = "sufficiency") -> TestReport:
    """Compare ``P(X = x | M(X) = m)`` with the orbit law of the fibre.

    ``law`` maps a tuple ``x`` (row-major over the spec's shape) to its
    probability.  The conditional law is computed by exact enumeration and
    compared to :func:`orbit_law_pmf` of a representative of each fibre.
    ``M`` should be a maximal invariant, so each fibre is one orbit.
    """
    shape = spec.sizes
    size = int(np.prod(shape))
    fibres = {}
    for vals in itertools.product(alphabet, repeat=size):
        x = np.array(vals, dtype=np.float64).reshape(shape)
        fibres.setdefault(_hashable(M(x)), []).append((tuple(float(v) for v in vals), law(vals)))
    worst, worst_fibre = 0.0, None
    checked = 0
    for m, members in fibres.items():
        total = sum(p for _, p in members)
        if total <= 0:
            continue
        rep = np.array(members[0][0]).reshape(shape)
        orbit = orbit_law_pmf(rep, spec).as_dict()
        keys = set(orbit) | {k for k, _ in members}
        cond = {k: p / total for k, p in members}
        for k in keys:
            dev = abs(cond.get(k, 0.0) - orbit.get(k, 0.0))
            if dev > worst:
                worst, worst_fibre = dev, m
        checked += 1
    details = {"fibres": checked, "tolerance": tol}
    warnings = []
    if worst > tol:
        details["worst_fibre"] = repr(worst_fibre)
        warnings.append("conditional law differs from the orbit law; input law is not invariant")
    return TestReport(name, bool(worst <= tol), worst, None, worst, checked, warnings, details)
