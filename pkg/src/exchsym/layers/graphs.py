"""Layers on arrays that carry vertex features.

``vertex_edge_layer`` acts on a symmetric edge array with one feature vector
per vertex (joint vertex relabelling); ``bipartite_feature_layer`` acts on a
rectangular array with row and column features (separate relabelling).  Both
use pooled statistics, computed in stages: edges first, then vertices from
sums over the new edge values.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..groups import GroupSpec, SymmetryError, act
from ..invariants.augment import _pair_key
from ..numkit import MlpParams, NoiseSource, ShapeError, is_symmetric, mlp_forward, noise_grid


def axis_sum(x: np.ndarray, axis: int, bitexact: bool = False, keepdims: bool = False) -> np.ndarray:
    """Sum along ``axis``; ``bitexact`` sorts the values first."""
    if bitexact:
        x = np.sort(x, axis=axis)
    return x.sum(axis=axis, keepdims=keepdims)


def _channels(a: np.ndarray, lead: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return a[..., None] if a.ndim == lead else a


def _grid_noise(src, tag, shape, dims, symmetric=False):
    if dims == 0:
        return np.zeros(tuple(shape) + (0,))
    if src is None:
        raise ValueError("noise dims > 0 need a noise source or explicit noise")
    return noise_grid(src.fork(tag), shape, dims, symmetric=symmetric)


def _squeeze(y: np.ndarray, lead: int, squeeze: bool) -> np.ndarray:
    return y[..., 0] if squeeze and y.ndim == lead + 1 and y.shape[-1] == 1 else y


@dataclass
class VertexEdgeParams:
    """Two-stage vertex/edge layer.

    Edge stage: ``Ye_ij = f_e([eta_ij, X_ij, lo_ij, hi_ij, rlo_ij, rhi_ij, T, V])``
    where ``lo/hi`` order the pair of vertex features, ``rlo/rhi`` the pair of
    edge row sums, ``T`` is the total edge sum and ``V`` the vertex feature
    sum.  ``f_e=None`` passes ``X`` through.

    Vertex stage: ``Yv_i = f_v([eta_i, X_i, X_ii, Ye_ii, sum_j m_ij])`` with
    ``m_ij = message([X_i, X_j, X_ij, Ye_ij])``, optionally gated by
    ``1{X_ij[0] > 0}``.  ``message=None`` uses ``Ye_ij`` as the message.
    """

    f_v: MlpParams
    f_e: Optional[MlpParams] = None
    message: Optional[MlpParams] = None
    edge_noise_dims: int = 0
    vertex_noise_dims: int = 0
    gate: bool = False


def _edge_stage(p, xv, xe, eta_e, bitexact):
    n = xe.shape[0]
    if p.f_e is None:
        return xe
    lo, hi = _pair_key(np.broadcast_to(xv[:, None, :], (n, n, xv.shape[1])),
                       np.broadcast_to(xv[None, :, :], (n, n, xv.shape[1])))
    rows = axis_sum(xe, 1, bitexact)
    rlo, rhi = _pair_key(np.broadcast_to(rows[:, None, :], (n, n, rows.shape[1])),
                         np.broadcast_to(rows[None, :, :], (n, n, rows.shape[1])))
    total = axis_sum(rows, 0, bitexact) if not bitexact else np.sort(xe.reshape(n * n, -1), axis=0).sum(axis=0)
    vsum = axis_sum(xv, 0, bitexact)
    feats = np.concatenate([eta_e, xe, lo, hi, rlo, rhi,
                            np.broadcast_to(total, (n, n, total.size)),
                            np.broadcast_to(vsum, (n, n, vsum.size))], axis=-1)
    if feats.shape[-1] != p.f_e.n_in:
        raise ShapeError(f"f_e expects {p.f_e.n_in} inputs, edge features have {feats.shape[-1]}")
    return mlp_forward(p.f_e, feats, bitexact)


def vertex_edge_layer(p: VertexEdgeParams, xn, xsym, src: Optional[NoiseSource] = None,
                      edge_noise=None, vertex_noise=None, bitexact: bool = False):
    """Jointly equivariant layer on ``(vertex features, symmetric edge array)``.

    Edge noise comes from ``src.fork(0)`` (symmetric in the vertex pair) and
    vertex noise from ``src.fork(1)`` unless given explicitly.  Returns
    ``(yn, ysym)``; single-channel outputs are squeezed when the matching
    input was.
    """
    xsym = np.asarray(xsym, dtype=np.float64)
    xn = np.asarray(xn, dtype=np.float64)
    if xsym.ndim < 2 or xsym.shape[0] != xsym.shape[1]:
        raise ShapeError(f"edge array must be square, got {xsym.shape}")
    if not is_symmetric(xsym):
        raise SymmetryError("edge array must be symmetric")
    n = xsym.shape[0]
    if xn.shape[0] != n:
        raise ShapeError(f"{xn.shape[0]} vertex features for {n} vertices")
    xe, xv = _channels(xsym, 2), _channels(xn, 1)
    eta_e = _grid_noise(src, 0, (n, n), p.edge_noise_dims, True) if edge_noise is None else _channels(edge_noise, 2)
    eta_v = _grid_noise(src, 1, (n,), p.vertex_noise_dims) if vertex_noise is None else _channels(vertex_noise, 1)
    if p.edge_noise_dims == 0:
        eta_e = eta_e[..., :0]
    if p.vertex_noise_dims == 0:
        eta_v = eta_v[..., :0]

    ye = _edge_stage(p, xv, xe, eta_e, bitexact)
    if p.message is None:
        msg = ye
    else:
        feats = np.concatenate([np.broadcast_to(xv[:, None, :], (n, n, xv.shape[1])),
                                np.broadcast_to(xv[None, :, :], (n, n, xv.shape[1])), xe, ye], axis=-1)
        if feats.shape[-1] != p.message.n_in:
            raise ShapeError(f"message expects {p.message.n_in} inputs, got {feats.shape[-1]}")
        msg = mlp_forward(p.message, feats, bitexact)
    if p.gate:
        msg = msg * (xe[..., :1] > 0)
    pooled = axis_sum(msg, 1, bitexact)
    diag = np.arange(n)
    vfeats = np.concatenate([eta_v, xv, xe[diag, diag], ye[diag, diag], pooled], axis=-1)
    if vfeats.shape[-1] != p.f_v.n_in:
        raise ShapeError(f"f_v expects {p.f_v.n_in} inputs, vertex features have {vfeats.shape[-1]}")
    yv = mlp_forward(p.f_v, vfeats, bitexact)
    return _squeeze(yv, 1, xn.ndim == 1), _squeeze(ye, 2, xsym.ndim == 2)


@dataclass
class BipartiteParams:
    """Three-stage layer on ``(row features, column features, array)``.

    Edges: ``Y_ij = f_e([eta_ij, X_ij, r_i, c_j, T, a_i, b_j, A, B])`` with row
    sums ``r``, column sums ``c``, total ``T``, row features ``a`` (sum ``A``)
    and column features ``b`` (sum ``B``).  Rows:
    ``yrow_i = f_row([eta_i, a_i, r_i, sum_j Y_ij])``; columns likewise.
    """

    f_e: MlpParams
    f_row: MlpParams
    f_col: MlpParams
    edge_noise_dims: int = 0
    row_noise_dims: int = 0
    col_noise_dims: int = 0


def bipartite_feature_layer(p: BipartiteParams, xrow, xcol, x, src: Optional[NoiseSource] = None,
                            edge_noise=None, row_noise=None, col_noise=None, bitexact: bool = False):
    """Equivariant under independent row and column relabelling.

    Noise streams: edges ``src.fork(0)``, rows ``src.fork(1)``, columns
    ``src.fork(2)``.  Returns ``(yrow, ycol, y)``.
    """
    x = np.asarray(x, dtype=np.float64)
    xrow = np.asarray(xrow, dtype=np.float64)
    xcol = np.asarray(xcol, dtype=np.float64)
    if x.ndim < 2:
        raise ShapeError("bipartite layer needs a 2-D array")
    n1, n2 = x.shape[:2]
    if xrow.shape[0] != n1 or xcol.shape[0] != n2:
        raise ShapeError(f"feature lengths {xrow.shape[0]}, {xcol.shape[0]} do not match {x.shape[:2]}")
    xe, a, b = _channels(x, 2), _channels(xrow, 1), _channels(xcol, 1)
    eta_e = _grid_noise(src, 0, (n1, n2), p.edge_noise_dims) if edge_noise is None else _channels(edge_noise, 2)
    eta_r = _grid_noise(src, 1, (n1,), p.row_noise_dims) if row_noise is None else _channels(row_noise, 1)
    eta_c = _grid_noise(src, 2, (n2,), p.col_noise_dims) if col_noise is None else _channels(col_noise, 1)
    eta_e = eta_e[..., :p.edge_noise_dims]
    eta_r = eta_r[..., :p.row_noise_dims]
    eta_c = eta_c[..., :p.col_noise_dims]

    rows = axis_sum(xe, 1, bitexact)
    cols = axis_sum(xe, 0, bitexact)
    total = np.sort(xe.reshape(n1 * n2, -1), axis=0).sum(axis=0) if bitexact else xe.sum(axis=(0, 1))
    asum, bsum = axis_sum(a, 0, bitexact), axis_sum(b, 0, bitexact)
    grid = (n1, n2)
    feats = np.concatenate([eta_e, xe,
                            np.broadcast_to(rows[:, None, :], grid + (rows.shape[1],)),
                            np.broadcast_to(cols[None, :, :], grid + (cols.shape[1],)),
                            np.broadcast_to(total, grid + (total.size,)),
                            np.broadcast_to(a[:, None, :], grid + (a.shape[1],)),
                            np.broadcast_to(b[None, :, :], grid + (b.shape[1],)),
                            np.broadcast_to(asum, grid + (asum.size,)),
                            np.broadcast_to(bsum, grid + (bsum.size,))], axis=-1)
    if feats.shape[-1] != p.f_e.n_in:
        raise ShapeError(f"f_e expects {p.f_e.n_in} inputs, edge features have {feats.shape[-1]}")
    y = mlp_forward(p.f_e, feats, bitexact)
    rin = np.concatenate([eta_r, a, rows, axis_sum(y, 1, bitexact)], axis=-1)
    cin = np.concatenate([eta_c, b, cols, axis_sum(y, 0, bitexact)], axis=-1)
    if rin.shape[-1] != p.f_row.n_in or cin.shape[-1] != p.f_col.n_in:
        raise ShapeError(f"f_row/f_col expect {p.f_row.n_in}/{p.f_col.n_in} inputs, "
                         f"got {rin.shape[-1]}/{cin.shape[-1]}")
    yrow = mlp_forward(p.f_row, rin, bitexact)
    ycol = mlp_forward(p.f_col, cin, bitexact)
    return (_squeeze(yrow, 1, xrow.ndim == 1), _squeeze(ycol, 1, xcol.ndim == 1),
            _squeeze(y, 2, x.ndim == 2))


def act_vertex_edge(g, xn, xsym):
    """Relabel vertices of ``(xn, xsym)`` by ``g``."""
    xsym = np.asarray(xsym)
    n = xsym.shape[0]
    g1 = g.parts[0] if hasattr(g, "parts") else g
    return act(g1, xn, GroupSpec.seq(n)), act(g1, xsym, GroupSpec.joint(n, symmetric=False))


def act_bipartite(g, xrow, xcol, x):
    """Relabel rows by ``g.parts[0]`` and columns by ``g.parts[1]``."""
    x = np.asarray(x)
    n1, n2 = x.shape[:2]
    return (act(g.parts[0], xrow, GroupSpec.seq(n1)), act(g.parts[1], xcol, GroupSpec.seq(n2)),
            act(g, x, GroupSpec.separate(n1, n2)))
