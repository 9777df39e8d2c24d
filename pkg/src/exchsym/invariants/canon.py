"""Canonical forms: lexicographic minimum of an orbit, with witness.

The canonical representative of ``x`` is the orbit element whose row-major
flattening (channels included) is lexicographically smallest.  The witness is
the lexicographically smallest group element ``g`` (concatenated image
vectors) with ``act(g, x) == canon``.

Two search strategies are provided.  :func:`canon_brute` applies every group
element and keeps the minimum; it is the reference.  :func:`canon_array`
uses exact reductions: the leading axis is resolved by a stable sort of its
slices (for any fixed arrangement of the other axes the lex-minimum is the
sorted order), and the remaining search is a depth-first search over column
(or vertex) orders that abandons a branch once a lower bound on the first
row already exceeds the incumbent's.
"""

import functools
import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..groups import (MAX_GROUP_ORDER, GroupSizeError, GroupSpec, Permutation, PermTuple,
                      SymmetryError, act, check_shape, enumerate_group, is_jointly_symmetric)

JOINT_MAX_N = 8
_CHUNK = 20000
_MAP_CACHE_LIMIT = 50000


class FeasibilityError(GroupSizeError):
    """Canonization search space exceeds the configured limits."""


@dataclass(frozen=True)
class CanonResult:
    canon: np.ndarray
    witness: PermTuple
    orbit_size: int
    stabilizer_order: int

    def key(self) -> tuple:
        return tuple(self.canon.ravel().tolist())


def _prepare(x, spec: GroupSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    check_shape(x, spec)
    if spec.kind == "joint" and spec.symmetric and not is_jointly_symmetric(x, spec.acted_dims):
        raise SymmetryError("joint canonization needs a symmetric array")
    return x


def _result(x, witness: PermTuple, spec: GroupSpec, stab: int) -> CanonResult:
    canon = act(witness, x, spec)
    return CanonResult(canon, witness, spec.order // stab, stab)


# --- reference search ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=32)
def _gather_maps(spec: GroupSpec, shape: Tuple[int, ...]) -> np.ndarray:
    plain = GroupSpec(spec.kind, spec.sizes, symmetric=False)
    base = np.arange(int(np.prod(shape, dtype=np.int64))).reshape(shape)
    return np.stack([act(g, base, plain).ravel() for g in enumerate_group(plain)])


def _maps_chunks(spec: GroupSpec, shape):
    if spec.order <= _MAP_CACHE_LIMIT:
        yield 0, _gather_maps(spec, shape)
        return
    plain = GroupSpec(spec.kind, spec.sizes, symmetric=False)
    base = np.arange(int(np.prod(shape, dtype=np.int64))).reshape(shape)
    rows, start = [], 0
    for g in enumerate_group(plain):
        rows.append(act(g, base, plain).ravel())
        if len(rows) == _CHUNK:
            yield start, np.stack(rows)
            start += len(rows)
            rows = []
    if rows:
        yield start, np.stack(rows)


def canon_brute(x, spec: GroupSpec) -> CanonResult:
    """Exhaustive lex-min over the whole group (reference implementation)."""
    x = _prepare(x, spec)
    if spec.order > MAX_GROUP_ORDER:
        raise FeasibilityError(f"group order {spec.order} exceeds {MAX_GROUP_ORDER}")
    flat = x.ravel()
    best_key: Optional[tuple] = None
    best_index = -1
    count = 0
    for start, maps in _maps_chunks(spec, x.shape):
        ys = flat[maps]
        if ys.shape[1] == 0:
            first = 0
            key = ()
            n_eq = ys.shape[0]
        else:
            order = np.lexsort(ys.T[::-1])
            first = int(order[0])
            key = tuple(ys[first].tolist())
            n_eq = int(np.sum(np.all(ys == ys[first], axis=1)))
        if best_key is None or key < best_key:
            best_key, best_index, count = key, start + first, n_eq
        elif key == best_key:
            count += n_eq
    witness = next(itertools.islice(enumerate_group(spec), best_index, None))
    return _result(x, witness, spec, count)


# --- pruned search ------------------------------------------------------------------------------

def _sort_slices(rows: np.ndarray):
    """Stable lexicographic sort of the rows of a 2-D array.

    Returns the order, the sorted rows, and the product of factorials of the
    multiplicities of equal rows.
    """
    if rows.shape[1] == 0:
        order = np.arange(rows.shape[0])
    else:
        order = np.lexsort(rows.T[::-1])
    srt = rows[order]
    mult = 1
    run = 1
    for k in range(1, srt.shape[0]):
        if np.array_equal(srt[k], srt[k - 1]):
            run += 1
        else:
            mult *= math.factorial(run)
            run = 1
    mult *= math.factorial(run)
    return order, srt, mult


def _inverse_image(alpha) -> Permutation:
    return Permutation(tuple(int(a) for a in alpha)).inverse()


def _canon_leading_sort(x: np.ndarray, spec: GroupSpec) -> CanonResult:
    """Sequences and 1-axis separate: sort the leading slices."""
    n = x.shape[0]
    order, _, mult = _sort_slices(x.reshape(n, -1))
    witness = PermTuple((_inverse_image(order),))
    return _result(x, witness, spec, mult)


class _Best:
    def __init__(self):
        self.key: Optional[tuple] = None
        self.witnesses: List[PermTuple] = []
        self.count = 0

    def offer(self, key: tuple, witness: PermTuple, count: int):
        if self.key is None or key < self.key:
            self.key, self.witnesses, self.count = key, [witness], count
        elif key == self.key:
            self.witnesses.append(witness)
            self.count += count

    def witness(self) -> PermTuple:
        return min(self.witnesses, key=PermTuple.key)


def _canon_separate_2d(x: np.ndarray, spec: GroupSpec) -> CanonResult:
    n1, n2 = spec.sizes
    x3 = x.reshape(n1, n2, -1)
    c = x3.shape[2]
    best = _Best()
    col_sums = x3.sum(axis=(0, 2))
    candidates = sorted(range(n2), key=lambda j: (col_sums[j], j))

    def dfs(prefix: List[int]):
        t = len(prefix)
        if t and best.key is not None:
            sub = x3[:, prefix, :].reshape(n1, t * c)
            low = min(tuple(r) for r in sub.tolist())
            if low > best.key[:t * c]:
                return
        if t == n2:
            rows = x3[:, prefix, :].reshape(n1, n2 * c)
            order, srt, mult = _sort_slices(rows)
            witness = PermTuple((_inverse_image(order), _inverse_image(prefix)))
            best.offer(tuple(srt.ravel().tolist()), witness, mult)
            return
        for j in candidates:
            if j not in prefix:
                prefix.append(j)
                dfs(prefix)
                prefix.pop()

    dfs([])
    return _result(x, best.witness(), spec, best.count)


def _canon_separate_nd(x: np.ndarray, spec: GroupSpec) -> CanonResult:
    sizes = spec.sizes
    n0 = sizes[0]
    best = _Best()
    for alphas in itertools.product(*(itertools.permutations(range(n)) for n in sizes[1:])):
        y = x
        for axis, alpha in enumerate(alphas, start=1):
            y = np.take(y, alpha, axis=axis)
        order, srt, mult = _sort_slices(y.reshape(n0, -1))
        witness = PermTuple((_inverse_image(order),) + tuple(_inverse_image(a) for a in alphas))
        best.offer(tuple(srt.ravel().tolist()), witness, mult)
    return _result(x, best.witness(), spec, best.count)


def _canon_joint_2d(x: np.ndarray, spec: GroupSpec) -> CanonResult:
    n = spec.sizes[0]
    x3 = x.reshape(n, n, -1)
    c = x3.shape[2]
    best = _Best()
    row_sums = x3.sum(axis=(1, 2))
    candidates = sorted(range(n), key=lambda v: (row_sums[v], v))

    def first_row_bound(prefix):
        a0 = prefix[0]
        head = [tuple(x3[a0, v]) for v in prefix]
        rest = sorted(tuple(x3[a0, v]) for v in range(n) if v not in prefix)
        return tuple(val for entry in head + rest for val in entry)

    def dfs(prefix: List[int]):
        t = len(prefix)
        if t and best.key is not None:
            if first_row_bound(prefix) > best.key[:n * c]:
                return
        if t == n:
            y = x3[np.ix_(prefix, prefix)]
            best.offer(tuple(y.ravel().tolist()), PermTuple((_inverse_image(prefix),)), 1)
            return
        for v in candidates:
            if v not in prefix:
                prefix.append(v)
                dfs(prefix)
                prefix.pop()

    dfs([])
    return _result(x, best.witness(), spec, best.count)


def search_cost(spec: GroupSpec) -> int:
    """Worst-case number of arrangements visited by :func:`canon_array`."""
    if spec.kind == "seq" or (spec.kind == "separate" and len(spec.sizes) == 1):
        return 1
    if spec.kind == "separate":
        return math.prod(math.factorial(n) for n in spec.sizes[1:])
    return spec.order


def check_feasible(spec: GroupSpec) -> None:
    if spec.kind == "joint" and spec.acted_dims == 2 and spec.sizes[0] > JOINT_MAX_N:
        raise FeasibilityError(f"joint canonization limited to n <= {JOINT_MAX_N}, got n={spec.sizes[0]}")
    if search_cost(spec) > MAX_GROUP_ORDER:
        raise FeasibilityError(f"search over {search_cost(spec)} arrangements exceeds {MAX_GROUP_ORDER}")


def canon_array(x, spec: GroupSpec, method: str = "pruned") -> CanonResult:
    """Canonical form of ``x`` under ``spec`` with its lex-min witness.

    ``method="brute"`` runs the exhaustive reference search instead.
    """
    if method == "brute":
        return canon_brute(x, spec)
    if method != "pruned":
        raise ValueError(f"unknown canonization method {method!r}")
    x = _prepare(x, spec)
    check_feasible(spec)
    if any(n == 0 for n in spec.sizes):
        return _result(x, PermTuple.identity(spec.part_sizes), spec, spec.order)
    if spec.kind == "seq" or (spec.kind == "separate" and len(spec.sizes) == 1):
        return _canon_leading_sort(x, spec)
    if spec.kind == "separate" and len(spec.sizes) == 2:
        return _canon_separate_2d(x, spec)
    if spec.kind == "separate":
        return _canon_separate_nd(x, spec)
    if spec.acted_dims == 2:
        return _canon_joint_2d(x, spec)
    return canon_brute(x, spec)
