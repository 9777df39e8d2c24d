"""Augmented canonical forms built from remainder ("Z") arrays.

For a distinguished index ``i`` the remainder array drops, on every acted
axis, the slice through ``i`` and broadcasts the dropped entries back over the
remaining positions as extra channels.  Its canonical form under the reduced
group, together with ``x[i]``, is the conditioning statistic of an
equivariant output at ``i``.
"""

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..groups import GroupSpec, SymmetryError, check_shape, is_jointly_symmetric
from ..numkit import ShapeError, is_symmetric
from .canon import CanonResult, canon_array


@dataclass(frozen=True)
class AugCanon:
    base: CanonResult
    center_value: np.ndarray
    mode: str
    p: int = 1

    def key(self) -> tuple:
        """Everything that must be invariant: centre value, remainder shape, canon."""
        return (tuple(np.ravel(self.center_value).tolist()), self.base.canon.shape, self.base.key())

    def features(self) -> np.ndarray:
        """Flat vector ``[center, canon...]`` suitable as network input."""
        return np.concatenate([np.ravel(self.center_value), self.base.canon.ravel()])


def axis_subsets(d: int, p: int) -> list:
    """Non-empty subsets of ``range(d)`` with at most ``p`` elements, ordered
    by size then lexicographically."""
    return [s for q in range(1, p + 1) for s in itertools.combinations(range(d), q)]


def z_array(x: np.ndarray, index: Sequence[int], p: int = 1) -> np.ndarray:
    """Remainder array for separate exchangeability.

    Entry ``j`` (over the indices that avoid ``index`` on every axis) holds
    ``x[j]`` followed by ``x[(i(s), j)]`` for each axis subset ``s`` of size
    ``1..p``, where ``(i(s), j)`` takes ``index`` on the axes in ``s`` and
    ``j`` elsewhere.  Trailing channel axes of ``x`` are kept and flattened.
    """
    d = len(index)
    sizes = x.shape[:d]
    chan = x.reshape(sizes + (-1,))
    keep = [np.array([k for k in range(n) if k != i], dtype=np.int64) for n, i in zip(sizes, index)]
    blocks = [chan[np.ix_(*keep)]]
    for s in axis_subsets(d, p):
        sel = [np.array([index[a]]) if a in s else keep[a] for a in range(d)]
        blocks.append(np.broadcast_to(chan[np.ix_(*sel)], blocks[0].shape))
    return np.concatenate(blocks, axis=-1)


def _pair_key(a: np.ndarray, b: np.ndarray):
    """Order two stacks of vectors entrywise-lexicographically (a <= b)."""
    la = a.reshape(-1, a.shape[-1])
    lb = b.reshape(-1, b.shape[-1])
    swap = np.zeros(la.shape[0], dtype=bool)
    decided = np.zeros(la.shape[0], dtype=bool)
    for k in range(la.shape[1]):
        lt = (la[:, k] < lb[:, k]) & ~decided
        gt = (la[:, k] > lb[:, k]) & ~decided
        swap |= gt
        decided |= lt | gt
    swap = swap.reshape(a.shape[:-1])[..., None]
    return np.where(swap, b, a), np.where(swap, a, b)


def z_array_joint(x: np.ndarray, i: int, j: int) -> np.ndarray:
    """Remainder array for joint exchangeability of a symmetric matrix.

    Vertices ``{i, j}`` are removed.  Entry ``(k, l)`` holds ``x[k, l]`` and the
    unordered pair ``{(x[i, l], x[j, l]), (x[k, i], x[k, j])}`` stored as a
    sorted pair.
    """
    n = x.shape[0]
    chan = x.reshape((n, n, -1))
    keep = np.array([v for v in range(n) if v not in (i, j)], dtype=np.int64)
    m = keep.size
    centre = chan[np.ix_(keep, keep)]
    col_pair = np.concatenate([chan[i, keep], chan[j, keep]], axis=-1)    # indexed by l
    row_pair = np.concatenate([chan[keep, i], chan[keep, j]], axis=-1)    # indexed by k
    a = np.broadcast_to(col_pair[None, :, :], (m, m, col_pair.shape[-1]))
    b = np.broadcast_to(row_pair[:, None, :], (m, m, row_pair.shape[-1]))
    lo, hi = _pair_key(a, b)
    return np.concatenate([centre, lo, hi], axis=-1)


def z_augment(x, index: Sequence[int], spec: GroupSpec, p: int = 1, method: str = "pruned") -> AugCanon:
    """Augmented canonical form of ``x`` at ``index``.

    ``separate``/d-array mode: remainder of :func:`z_array` with subsets of size
    up to ``p`` canonized under the product of ``S_{n_k - 1}``.  ``joint``
    mode: the index is an unordered pair; both orientations are canonized under
    ``S_{n - |{i, j}|}`` and the smaller result is kept.
    """
    x = np.asarray(x, dtype=np.float64)
    check_shape(x, spec)
    index = tuple(int(i) for i in index)
    if spec.kind == "joint":
        if spec.acted_dims != 2:
            raise ShapeError("joint augmentation supports matrices only")
        if not is_jointly_symmetric(x, 2):
            raise SymmetryError("joint augmentation needs a symmetric array")
        if len(index) != 2 or any(not 0 <= v < spec.sizes[0] for v in index):
            raise IndexError(f"bad vertex pair {index}")
        i, j = index
        m = spec.sizes[0] - len({i, j})
        sub = GroupSpec.joint(m)
        results = [canon_array(z_array_joint(x, a, b), sub, method) for a, b in {(i, j), (j, i)}]
        base = min(results, key=CanonResult.key)
        return AugCanon(base, x[i, j].copy(), "joint", 1)

    d = spec.acted_dims
    if not 1 <= p <= d:
        raise ValueError(f"p must lie in 1..{d}, got {p}")
    if len(index) != d or any(not 0 <= i < n for i, n in zip(index, spec.sizes)):
        raise IndexError(f"index {index} out of range for {spec.sizes}")
    z = z_array(x, index, p)
    sub = GroupSpec.separate(*(n - 1 for n in spec.sizes))
    base = canon_array(z, sub, method)
    return AugCanon(base, x[index].copy(), "separate" if d == 2 else "darray", p)


def broadcast_vertex(xn, xsym) -> np.ndarray:
    """Entry ``(i, j)`` holds ``(xsym[i, j], min(xn[i], xn[j]), max(xn[i], xn[j]))``.

    Vector-valued vertex features are ordered lexicographically and emitted
    as two blocks of channels.
    """
    xsym = np.asarray(xsym, dtype=np.float64)
    xn = np.asarray(xn, dtype=np.float64)
    if not is_symmetric(xsym):
        raise SymmetryError("edge array must be symmetric")
    n = xsym.shape[0]
    if xn.shape[0] != n:
        raise ShapeError(f"{xn.shape[0]} vertex features for {n} vertices")
    feats = xn.reshape(n, -1)
    a = np.broadcast_to(feats[:, None, :], (n, n, feats.shape[1]))
    b = np.broadcast_to(feats[None, :, :], (n, n, feats.shape[1]))
    lo, hi = _pair_key(a, b)
    return np.concatenate([xsym.reshape(n, n, -1), lo, hi], axis=-1)
