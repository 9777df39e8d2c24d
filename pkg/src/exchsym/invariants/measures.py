"""Empirical measures, the sorting representative equivariant, orbit laws."""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, List, Sequence, Tuple

import numpy as np

from ..groups import GroupSpec, Permutation, act, enumerate_group, sample_haar
from ..numkit import NoiseSource, lex_key


def _encode(e) -> Hashable:
    if isinstance(e, np.ndarray):
        return e.item() if e.ndim == 0 else tuple(e.ravel().tolist())
    if isinstance(e, (list, tuple)):
        return tuple(e)
    return e


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Multiset of a sequence, stored as its sorted entries."""

    entries: tuple

    def __len__(self):
        return len(self.entries)

    def counts(self) -> dict:
        return dict(Counter(self.entries))


def empirical_measure(x: Sequence) -> EmpiricalMeasure:
    """Sorted copy of the entries; vector-valued entries sort lexicographically."""
    if isinstance(x, np.ndarray) and x.ndim >= 1:
        items = [_encode(row) for row in x]
    else:
        items = [_encode(e) for e in x]
    return EmpiricalMeasure(tuple(sorted(items)))


def sort_tau(x) -> Tuple[Permutation, np.ndarray]:
    """Representative equivariant for S_n on sequences.

    Returns ``(tau, rep)`` with ``rep = act(tau^-1, x)`` sorted ascending
    (lexicographically along trailing axes).  Ties keep their original order,
    so ``tau`` is the identity on already-sorted input.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        order = np.argsort(x, kind="stable")
    else:
        flat = x.reshape(x.shape[0], -1)
        order = np.lexsort(flat.T[::-1]) if flat.shape[1] else np.arange(x.shape[0])
    tau = Permutation(tuple(int(i) for i in order))
    return tau, x[order]


@dataclass(frozen=True)
class DiscreteDist:
    """Finite distribution with integer counts over a common denominator.

    ``support`` holds row-major tuples of the outcomes (of shape ``shape``),
    sorted ascending.
    """

    support: Tuple[tuple, ...]
    counts: Tuple[int, ...]
    total: int
    shape: Tuple[int, ...]

    @property
    def pmf(self) -> Tuple[float, ...]:
        return tuple(c / self.total for c in self.counts)

    def exact(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(c, self.total) for c in self.counts)

    def prob(self, outcome) -> float:
        key = lex_key(outcome) if not isinstance(outcome, tuple) else outcome
        try:
            return self.counts[self.support.index(key)] / self.total
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.pmf))


def orbit_law_pmf(rep, spec: GroupSpec) -> DiscreteDist:
    """Law of ``act(G, rep)`` with G uniform on the group, by enumeration."""
    rep = np.asarray(rep, dtype=np.float64)
    counts: Counter = Counter()
    total = 0
    for g in enumerate_group(spec):
        counts[lex_key(act(g, rep, spec))] += 1
        total += 1
    support = tuple(sorted(counts))
    return DiscreteDist(support, tuple(counts[s] for s in support), total, rep.shape)


def orbit_law_sample(rep, spec: GroupSpec, src: NoiseSource) -> Tuple[np.ndarray, NoiseSource]:
    """One draw from the orbit law: a uniform group element applied to ``rep``."""
    g, src = sample_haar(spec, src)
    return act(g, np.asarray(rep, dtype=np.float64), spec), src


def orbit_partition(points: List[np.ndarray], spec: GroupSpec) -> List[int]:
    """Orbit labels for ``points`` by union-find over the full group action.

    Points whose images fall outside ``points`` are ignored, so pass a
    group-closed collection.
    """
    keys = [lex_key(p) for p in points]
    where = {k: i for i, k in enumerate(keys)}
    parent = list(range(len(points)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    group = list(enumerate_group(spec))
    for i, p in enumerate(points):
        for g in group:
            j = where.get(lex_key(act(g, p, spec)))
            if j is not None:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    return [find(i) for i in range(len(points))]
