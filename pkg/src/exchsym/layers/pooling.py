"""Permutation-invariant pooling over the element axis (axis -2)."""

import math
from typing import Callable, Optional

import numpy as np

from ..numkit import NoiseSource, ShapeError, noise_grid

POOLINGS = ("sum", "max", "mean", "logsumexp", "ustat")
USTAT_EXACT_LIMIT = 10 ** 5
USTAT_SAMPLES = 10 ** 4


def canonical_order(emb: np.ndarray) -> np.ndarray:
    """Sort the rows along axis -2 lexicographically, independently for each
    leading index.  Equal multisets of rows give identical arrays."""
    emb = np.asarray(emb, dtype=np.float64)
    lead, (m, e) = emb.shape[:-2], emb.shape[-2:]
    flat = emb.reshape(-1, m, e)
    b = flat.shape[0]
    if m == 0 or e == 0:
        return emb
    keys = [flat[:, :, c].ravel() for c in range(e - 1, -1, -1)]
    keys.append(np.repeat(np.arange(b), m))
    order = np.lexsort(keys).reshape(b, m) - (np.arange(b) * m)[:, None]
    out = np.take_along_axis(flat, order[:, :, None], axis=1)
    return out.reshape(lead + (m, e))


def element_ranks(x: np.ndarray) -> np.ndarray:
    """Rank of each element along axis -2 in the stable lexicographic order."""
    lead, (m, e) = x.shape[:-2], x.shape[-2:]
    flat = x.reshape(-1, m, e)
    b = flat.shape[0]
    keys = [flat[:, :, c].ravel() for c in range(e - 1, -1, -1)]
    keys.append(np.repeat(np.arange(b), m))
    order = np.lexsort(keys).reshape(b, m) - (np.arange(b) * m)[:, None]
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(m), (b, m)), axis=1)
    return ranks.reshape(lead + (m,))


def subset_table(n: int, k: int) -> np.ndarray:
    """All ``k``-subsets of ``range(n)`` in lexicographic order, shape ``(C(n,k), k)``."""
    from itertools import combinations
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)


def sample_subsets(n: int, k: int, count: int, src: NoiseSource) -> np.ndarray:
    """``count`` uniform ``k``-subsets (with replacement across draws), each
    listed in increasing order.  Draw ``r`` uses the noise of ``src.fork(r)``."""
    u = noise_grid(src, (count,), k)
    pools = np.tile(np.arange(n), (count, 1))
    rows = np.arange(count)
    for step in range(k):
        j = step + np.minimum((u[:, step] * (n - step)).astype(np.int64), n - step - 1)
        a, b = pools[rows, step].copy(), pools[rows, j].copy()
        pools[rows, step], pools[rows, j] = b, a
    return np.sort(pools[:, :k], axis=1)


def ordered_tuples(x: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Gather ``x[..., subset, :]`` with members ordered by element rank.

    Returns ``(..., C, k, e)`` plus the gathered positions ``(..., C, k)``.
    """
    ranks = element_ranks(x)
    lead = x.shape[:-2]
    pos = np.broadcast_to(subsets, lead + subsets.shape)
    r = np.take_along_axis(ranks[..., None, :], pos.reshape(lead + (1, -1)), axis=-1)
    r = r.reshape(pos.shape)
    pos = np.take_along_axis(pos, np.argsort(r, axis=-1), axis=-1)
    flat_pos = pos.reshape(lead + (-1,))
    tuples = np.take_along_axis(x, flat_pos[..., None], axis=-2)
    return tuples.reshape(pos.shape + (x.shape[-1],)), pos


def ustat_plan(n: int, k: int, src: Optional[NoiseSource] = None):
    """Subsets to average over: all of them when ``C(n, k) <= 10^5``, else
    ``10^4`` uniformly sampled ones (``src`` required)."""
    if k < 1 or k > n:
        raise ValueError(f"ustat order k={k} invalid for n={n}")
    if math.comb(n, k) <= USTAT_EXACT_LIMIT:
        return subset_table(n, k), True
    if src is None:
        raise ValueError("sampled U-statistic needs a noise source")
    return sample_subsets(n, k, USTAT_SAMPLES, src), False


def pool(xs, pooling: str = "sum", k: int = 2, kernel: Optional[Callable] = None,
         src: Optional[NoiseSource] = None, bitexact: bool = False) -> np.ndarray:
    """Pool ``xs`` of shape ``(..., m, e)`` over the element axis.

    ``ustat`` averages ``kernel`` over ``k``-element subsets; ``kernel`` maps
    ``(..., C, k, e)`` tuples (members in canonical order) to ``(..., C)`` or
    ``(..., C, f)``.  With ``bitexact`` the reduction runs in a canonical
    element order so permuted inputs give identical bytes.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[:, None]
    if xs.shape[-2] == 0:
        raise ShapeError("cannot pool an empty set")
    if pooling == "ustat":
        if kernel is None:
            raise ValueError("ustat pooling needs a kernel")
        subsets, _ = ustat_plan(xs.shape[-2], k, src)
        tuples, _ = ordered_tuples(xs, subsets)
        vals = np.asarray(kernel(tuples), dtype=np.float64)
        if vals.ndim == tuples.ndim - 2:
            vals = vals[..., None]
        if bitexact:
            vals = canonical_order(vals)
        # left-to-right in subset order, so a plain loop reproduces it exactly
        return np.cumsum(vals, axis=-2)[..., -1, :] / vals.shape[-2]
    if bitexact and pooling != "max":
        xs = canonical_order(xs)
    if pooling == "sum":
        return xs.sum(axis=-2)
    if pooling == "mean":
        return xs.sum(axis=-2) / xs.shape[-2]
    if pooling == "max":
        return xs.max(axis=-2)
    if pooling == "logsumexp":
        top = xs.max(axis=-2, keepdims=True)
        return top[..., 0, :] + np.log(np.exp(xs - top).sum(axis=-2))
    raise ValueError(f"unknown pooling {pooling!r}")
