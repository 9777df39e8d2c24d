"""Checks that sweep every element of a finite group."""

import itertools
from typing import Callable, Optional, Sequence

import numpy as np

from ..groups import GroupSizeError, GroupSpec, act, enumerate_group
from ..invariants import orbit_partition
from .report import TestReport

MAX_ORACLE_WORK = 10 ** 7


def _flat(v) -> np.ndarray:
    if isinstance(v, (tuple, list)):
        return np.concatenate([_flat(e) for e in v]) if v else np.zeros(0)
    if hasattr(v, "y"):
        v = v.y
    return np.ravel(np.asarray(v, dtype=np.float64))


def rel_deviation(a, b) -> float:
    """``max|a - b| / max(1, max|b|)``; shape mismatch counts as infinite."""
    fa, fb = _flat(a), _flat(b)
    if fa.shape != fb.shape:
        return float("inf")
    if fa.size == 0:
        return 0.0
    return float(np.max(np.abs(fa - fb)) / max(1.0, float(np.max(np.abs(fb)))))


def _default_action(spec):
    return lambda g, x: act(g, x, spec)


def _act_noise(g, noise, spec):
    out = []
    for item in noise:
        if isinstance(item, tuple) and len(item) == 2:
            arr, how = item
            out.append(act(g, arr, how) if isinstance(how, GroupSpec) else how(g, arr))
        else:
            out.append(act(g, item, spec))
    return out


def _sweep(name, fn, x, spec, tol, noise, action, compare, limit):
    action = action or _default_action(spec)
    noise = list(noise or ())
    base = fn(x, *[n[0] if isinstance(n, tuple) else n for n in noise])
    worst, worst_g, count = 0.0, None, 0
    for g in enumerate_group(spec, limit):
        y = fn(action(g, x), *_act_noise(g, noise, spec))
        dev = compare(g, base, y)
        count += 1
        if dev > worst:
            worst, worst_g = dev, g
    details = {"group": spec.to_dict(), "tolerance": tol}
    if worst_g is not None:
        details["worst_element"] = [list(p.image) for p in worst_g.parts]
    return TestReport(name, bool(worst <= tol), worst, None, worst, count, [], details)


def check_invariance_exhaustive(fn: Callable, x, spec: GroupSpec, tol: float = 1e-9,
                                noise: Sequence = (), action: Optional[Callable] = None,
                                name: str = "invariance", limit: int = 10 ** 6) -> TestReport:
    """``fn(g.x, g.noise...) == fn(x, noise...)`` for every ``g``.

    ``noise`` items are arrays co-permuted with ``x``, or ``(array, how)``
    pairs where ``how`` is a GroupSpec or a callable ``how(g, array)``.
    Noise that is not indexed by position belongs in ``fn``'s closure.  ``action(g, x)``
    overrides the action on ``x`` (for structured inputs).
    """
    return _sweep(name, fn, x, spec, tol, noise, action,
                  lambda g, base, y: rel_deviation(y, base), limit)


def check_equivariance_exhaustive(fn: Callable, x, spec: GroupSpec, tol: float = 1e-9,
                                  noise: Sequence = (), action: Optional[Callable] = None,
                                  out_action: Optional[Callable] = None,
                                  name: str = "equivariance", limit: int = 10 ** 6) -> TestReport:
    """``fn(g.x, g.noise...) == g.fn(x, noise...)`` for every ``g``.

    ``out_action`` acts on outputs and defaults to ``action``.
    """
    act_in = action or _default_action(spec)
    act_out = out_action or act_in
    return _sweep(name, fn, x, spec, tol, noise, act_in,
                  lambda g, base, y: rel_deviation(y, act_out(g, base)), limit)


def _hashable(v):
    if hasattr(v, "key") and callable(v.key):
        return v.key()
    if isinstance(v, np.ndarray):
        return (v.shape, tuple(v.ravel().tolist()))
    if isinstance(v, (list, tuple)):
        return tuple(_hashable(e) for e in v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def all_arrays(alphabet, spec: GroupSpec) -> list:
    """Every array over ``alphabet`` with the spec's shape; symmetric ones
    only for a symmetric joint spec."""
    shape = spec.sizes
    if spec.kind == "joint" and spec.symmetric and len(shape) == 2:
        n = shape[0]
        cells = [(i, j) for i in range(n) for j in range(i, n)]
        out = []
        for vals in itertools.product(alphabet, repeat=len(cells)):
            a = np.empty(shape)
            for (i, j), v in zip(cells, vals):
                a[i, j] = a[j, i] = v
            out.append(a)
        return out
    size = int(np.prod(shape))
    return [np.array(vals, dtype=np.float64).reshape(shape)
            for vals in itertools.product(alphabet, repeat=size)]


def verify_maximal_invariant(M: Callable, spec: GroupSpec, alphabet, n: Optional[int] = None,
                             name: str = "maximal_invariant") -> TestReport:
    """Check that ``M`` is constant on orbits and separates distinct orbits,
    over every array on ``alphabet``, against a union-find orbit partition.

    ``n`` is accepted for symmetry with the sequence case and must agree
    with the spec when given.
    """
    if n is not None and spec.kind == "seq" and spec.sizes != (n,):
        raise ValueError(f"n={n} disagrees with {spec.sizes}")
    if spec.kind == "joint" and spec.symmetric:
        m = spec.sizes[0]
        cells = m * (m + 1) // 2
    else:
        cells = int(np.prod(spec.sizes))
    work = len(alphabet) ** cells * spec.order
    if work > MAX_ORACLE_WORK:
        raise GroupSizeError(f"oracle needs {work} actions, limit is {MAX_ORACLE_WORK}")
    points = all_arrays(alphabet, spec)
    labels = orbit_partition(points, spec)
    values = [_hashable(M(p)) for p in points]
    by_orbit, by_value = {}, {}
    constancy, separation = [], []
    for p, lab, val in zip(points, labels, values):
        first = by_orbit.setdefault(lab, (val, p))
        if first[0] != val and len(constancy) < 5:
            constancy.append([first[1].tolist(), p.tolist()])
        other = by_value.setdefault(val, (lab, p))
        if other[0] != lab and len(separation) < 5:
            separation.append([other[1].tolist(), p.tolist()])
    passed = not constancy and not separation
    details = {"orbits": len(by_orbit), "values": len(by_value), "group": spec.to_dict(),
               "constancy_violations": constancy, "separation_violations": separation}
    return TestReport(name, passed, float(len(constancy) + len(separation)), None,
                      0.0 if passed else 1.0, len(points), [], details)
