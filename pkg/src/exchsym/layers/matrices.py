"""Equivariant layers on matrices and d-dimensional arrays.

The default layers condition on pooled statistics (row, column and grand
sums, or one pooled sum per subset of kept axes).  These are equivariant but
not maximal.  :func:`augmented_layer` conditions on the full augmented
canonical form instead and is limited to canonization-feasible sizes.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..groups import GroupSpec, SymmetryError
from ..invariants import z_augment
from ..numkit import MlpParams, NoiseSource, ShapeError, is_symmetric, mlp_forward, noise_grid
from ..numkit.mlp import ACTIVATIONS, _act

DARRAY_MAX_D = 4
DARRAY_MAX_DIM = 6


def pooled_sum(x: np.ndarray, keep: Sequence[int], bitexact: bool = False) -> np.ndarray:
    """Sum of ``x`` over every axis not in ``keep``, with those axes kept as
    size one for broadcasting.  ``bitexact`` sums each fibre in sorted order."""
    d = x.ndim
    summed = [a for a in range(d) if a not in keep]
    if not summed:
        return x
    moved = np.moveaxis(x, summed, list(range(d - len(summed), d)))
    fibres = moved.reshape(moved.shape[:d - len(summed)] + (-1,))
    if bitexact:
        fibres = np.sort(fibres, axis=-1)
    return np.expand_dims(fibres.sum(axis=-1), summed)


@dataclass
class MatrixLayerParams:
    """Either ``thetas = (t0, ..., t4)`` for
    ``act(t0 + t1 X_ij + t2 rowsum_i + t3 colsum_j + t4 total)``, or ``mlp``
    mapping ``[eta_ij, X_ij, rowsum_i, colsum_j, total]`` to one output."""

    thetas: Optional[Tuple[float, ...]] = None
    mlp: Optional[MlpParams] = None
    activation: str = "identity"
    noise_dims: int = 0

    def __post_init__(self):
        if (self.thetas is None) == (self.mlp is None):
            raise ValueError("exactly one of thetas / mlp must be given")
        if self.thetas is not None:
            if len(self.thetas) != 5:
                raise ValueError("thetas needs five entries")
            self.thetas = tuple(float(t) for t in self.thetas)
        if self.mlp is not None and (self.mlp.n_in != self.noise_dims + 4 or self.mlp.n_out != 1):
            raise ShapeError(f"matrix mlp must map {self.noise_dims + 4} inputs to 1 output")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def _matrix_noise(p, src, noise, shape, joint):
    if noise is not None:
        return np.asarray(noise, dtype=np.float64)
    if p.noise_dims == 0:
        return np.zeros(shape + (0,))
    if src is None:
        raise ValueError("noise_dims > 0 needs a noise source or noise array")
    return noise_grid(src, shape, p.noise_dims, symmetric=joint)


def exch_matrix_layer(p: MatrixLayerParams, x, src: Optional[NoiseSource] = None,
                      mode: str = "separate", noise=None, bitexact: bool = False) -> np.ndarray:
    """Row/column-sum layer, equivariant under separate or joint permutations.

    In ``joint`` mode the input must be symmetric, noise is symmetric, and the
    output is symmetrised as ``(Y + Y^T) / 2``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"matrix layer needs a 2-D array, got {x.shape}")
    if mode not in ("separate", "joint"):
        raise ValueError(f"unknown mode {mode!r}")
    joint = mode == "joint"
    if joint and not is_symmetric(x):
        raise SymmetryError("joint mode needs a symmetric matrix")
    rows = pooled_sum(x, (0,), bitexact)
    cols = pooled_sum(x, (1,), bitexact)
    total = pooled_sum(x, (), bitexact)
    if p.thetas is not None:
        t0, t1, t2, t3, t4 = p.thetas
        y = _act(p.activation, t0 + t1 * x + t2 * rows + t3 * cols + t4 * total)
    else:
        eta = _matrix_noise(p, src, noise, x.shape, joint)
        if eta.shape != x.shape + (p.noise_dims,):
            raise ShapeError(f"noise shape {eta.shape} does not match {x.shape}")
        feats = np.concatenate([eta, x[..., None],
                                np.broadcast_to(rows, x.shape)[..., None],
                                np.broadcast_to(cols, x.shape)[..., None],
                                np.broadcast_to(total, x.shape)[..., None]], axis=-1)
        y = _act(p.activation, mlp_forward(p.mlp, feats, bitexact)[..., 0])
    if joint:
        y = (y + y.T) / 2
    return y


@dataclass
class DArrayParams:
    """One coefficient per subset ``s`` of kept axes (the term pools over the
    axes outside ``s``), plus a bias: ``act(bias + sum_s theta_s * pooled_s)``."""

    thetas: Dict[Tuple[int, ...], float] = field(default_factory=dict)
    bias: float = 0.0
    activation: str = "identity"

    def __post_init__(self):
        self.thetas = {tuple(sorted(int(a) for a in s)): float(v) for s, v in self.thetas.items()}
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @classmethod
    def from_matrix_thetas(cls, thetas, activation="identity") -> "DArrayParams":
        t0, t1, t2, t3, t4 = thetas
        return cls({(0, 1): t1, (0,): t2, (1,): t3, (): t4}, t0, activation)


def all_axis_subsets(d: int):
    """Subsets of ``range(d)`` from largest to smallest, lexicographic within a size."""
    return [s for q in range(d, -1, -1) for s in itertools.combinations(range(d), q)]


def darray_layer(p: DArrayParams, x, bitexact: bool = False) -> np.ndarray:
    """Pooled-sum layer on a d-array, equivariant under S_n1 x ... x S_nd."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim > DARRAY_MAX_D or any(n > DARRAY_MAX_DIM for n in x.shape):
        raise ShapeError(f"d-array layer limited to d <= {DARRAY_MAX_D}, dims <= {DARRAY_MAX_DIM}")
    for s in p.thetas:
        if any(a >= x.ndim for a in s):
            raise ShapeError(f"axis subset {s} invalid for a {x.ndim}-array")
    acc = p.bias
    for s in all_axis_subsets(x.ndim):
        if s in p.thetas:
            acc = acc + p.thetas[s] * pooled_sum(x, s, bitexact)
    return _act(p.activation, np.broadcast_to(acc, x.shape).astype(np.float64))


def augmented_layer(f: MlpParams, x, spec: GroupSpec, src: Optional[NoiseSource] = None,
                    noise=None, p: Optional[int] = None, noise_dims: int = 0,
                    f_diag: Optional[MlpParams] = None) -> np.ndarray:
    """Maximal-statistic layer ``Y_i = f([eta_i, AugCanon(x, i)])``.

    ``spec`` is ``separate(n1, ..., nd)`` (augmentation order ``p``, default
    ``d``) or ``joint(n)`` for symmetric matrices.  In joint mode diagonal
    entries drop one vertex instead of two, so their features are longer and
    go to ``f_diag``.  Heads must output one value.
    """
    x = np.asarray(x, dtype=np.float64)
    joint = spec.kind == "joint"
    if spec.kind == "seq":
        raise ValueError("use the set layers for sequences")
    if joint and f_diag is None:
        raise ValueError("joint mode needs f_diag for the diagonal entries")
    shape = x.shape[:spec.acted_dims]
    if noise is None:
        if noise_dims and src is None:
            raise ValueError("noise_dims > 0 needs a noise source or noise array")
        noise = noise_grid(src, shape, noise_dims, symmetric=joint) if noise_dims else np.zeros(shape + (0,))
    noise = np.asarray(noise, dtype=np.float64)
    if p is None:
        p = spec.acted_dims
    y = np.empty(shape)
    for idx in itertools.product(*(range(n) for n in shape)):
        if joint and idx[1] < idx[0]:
            y[idx] = y[idx[1], idx[0]]
            continue
        aug = z_augment(x, idx, spec, p=1 if joint else p)
        head = f_diag if joint and idx[0] == idx[1] else f
        y[idx] = mlp_forward(head, np.concatenate([noise[idx], aug.features()]))[0]
    return y
