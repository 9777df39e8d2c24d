"""Noise-outsourced invariant and equivariant layers on sets.

Invariant:   ``y = rho([eta, pool_j phi(x_j)])``
Equivariant: ``y_i = rho([eta_i, x_i, pool_j phi(x_j)])``

``eta`` is outsourced uniform noise indexed like the output, so permuting the
input together with the noise permutes (equivariant) or preserves
(invariant) the output exactly.  Inputs are ``(n,)``, ``(n, d)`` or batched
``(B, n, d)``.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from ..numkit import (MlpGrads, MlpParams, NoiseSource, ShapeError, mlp_backward_cached,
                      mlp_forward_cached, noise_grid)
from .pooling import POOLINGS, canonical_order, ordered_tuples, pool, ustat_plan


@dataclass
class SetLayerParams:
    """Parameters of a set layer.

    ``linear=(theta0, theta1)`` selects the equivariant linear map
    ``theta0 * x_i + theta1 * sum_j x_j`` and ignores ``phi``/``rho``.  For
    ``ustat`` pooling, ``phi`` is the kernel applied to the concatenation of
    the ``k`` members of each subset.
    """

    phi: Optional[MlpParams] = None
    rho: Optional[MlpParams] = None
    pooling: str = "sum"
    k: int = 2
    noise_dims: int = 0
    mode: str = "invariant"
    linear: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.pooling not in POOLINGS:
            raise ValueError(f"unknown pooling {self.pooling!r}")
        if self.mode not in ("invariant", "equivariant"):
            raise ValueError(f"unknown set layer mode {self.mode!r}")
        if self.linear is not None:
            if self.mode != "equivariant":
                raise ValueError("linear set layers are equivariant")
            self.linear = (float(self.linear[0]), float(self.linear[1]))
        if self.noise_dims < 0:
            raise ValueError("noise_dims must be >= 0")

    def embed_dim(self, d_in: int) -> int:
        if self.phi is not None:
            return self.phi.n_out
        return d_in * self.k if self.pooling == "ustat" else d_in

    def out_dim(self, d_in: int) -> int:
        if self.linear is not None:
            return d_in
        return self.rho.n_out if self.rho is not None else self._rho_in(d_in)

    def _rho_in(self, d_in: int) -> int:
        extra = d_in if self.mode == "equivariant" else 0
        return self.noise_dims + extra + self.embed_dim(d_in)

    def check(self, d_in: int) -> None:
        if self.linear is not None:
            return
        phi_in = d_in * self.k if self.pooling == "ustat" else d_in
        if self.phi is not None and self.phi.n_in != phi_in:
            raise ShapeError(f"phi expects {self.phi.n_in} inputs, elements give {phi_in}")
        if self.rho is not None and self.rho.n_in != self._rho_in(d_in):
            raise ShapeError(f"rho expects {self.rho.n_in} inputs, layer provides {self._rho_in(d_in)}")

    def copy(self) -> "SetLayerParams":
        return replace(self, phi=self.phi.copy() if self.phi else None,
                       rho=self.rho.copy() if self.rho else None)


@dataclass
class SetLayerGrads:
    phi: Optional[MlpGrads] = None
    rho: Optional[MlpGrads] = None
    linear: Optional[Tuple[float, float]] = None


@dataclass
class _Cache:
    x: np.ndarray
    noise: np.ndarray
    phi_cache: object = None
    rho_cache: object = None
    emb: Optional[np.ndarray] = None
    pooled: Optional[np.ndarray] = None
    pos: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)


def _as_batch(x) -> Tuple[np.ndarray, int]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :, None], 1
    if x.ndim == 2:
        return x[None], 2
    if x.ndim == 3:
        return x, 3
    raise ShapeError(f"set input must have 1-3 axes, got shape {x.shape}")


def draw_set_noise(p: SetLayerParams, src: Optional[NoiseSource], batch: Optional[int], n: int) -> np.ndarray:
    """Noise for one call: position ``i`` (or ``(b, i)``) reads ``src.fork(i)``
    (``src.fork(b, i)``); invariant layers read ``src.fork()`` (``src.fork(b)``)."""
    lead = () if batch is None else (batch,)
    shape = lead + ((n,) if p.mode == "equivariant" else ())
    if p.noise_dims == 0 or p.linear is not None:
        return np.zeros(shape + (0,))
    if src is None:
        raise ValueError("layer has noise_dims > 0 but no noise source or noise array given")
    return noise_grid(src, shape, p.noise_dims)


def _pooled_forward(p: SetLayerParams, x: np.ndarray, src, bitexact: bool, cache: _Cache):
    if p.pooling == "ustat":
        # three-index forks are reserved for subset sampling
        subsets, _ = ustat_plan(x.shape[1], p.k, src.fork(0, 0, 0) if src is not None else None)
        tuples, pos = ordered_tuples(x, subsets)
        flat = tuples.reshape(tuples.shape[:2] + (-1,))
        if p.phi is not None:
            emb, cache.phi_cache = mlp_forward_cached(p.phi, flat, bitexact)
        else:
            emb = flat
        cache.pos = pos
        cache.emb = emb
        return pool(emb, "mean", bitexact=bitexact)
    if p.phi is not None:
        emb, cache.phi_cache = mlp_forward_cached(p.phi, x, bitexact)
    else:
        emb = x
    cache.emb = emb
    return pool(emb, p.pooling, bitexact=bitexact)


def set_layer_forward(p: SetLayerParams, x, noise=None, src=None, bitexact=False):
    """Batched forward pass on ``(B, n, d)``; returns ``(y, cache)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError("set_layer_forward expects (B, n, d) input")
    if x.shape[1] == 0:
        raise ShapeError("empty set")
    b, n, d = x.shape
    p.check(d)
    if noise is None:
        noise = draw_set_noise(p, src, b, n)
    noise = np.asarray(noise, dtype=np.float64)
    want = (b, n, p.noise_dims) if p.mode == "equivariant" else (b, p.noise_dims)
    if p.linear is None and noise.shape != want:
        raise ShapeError(f"noise shape {noise.shape}, expected {want}")
    cache = _Cache(x, noise)

    if p.linear is not None:
        total = (canonical_order(x) if bitexact else x).sum(axis=1)
        cache.pooled = total
        return p.linear[0] * x + p.linear[1] * total[:, None, :], cache

    pooled = _pooled_forward(p, x, src, bitexact, cache)
    cache.pooled = pooled
    if p.mode == "invariant":
        h = np.concatenate([noise, pooled], axis=-1)
    else:
        h = np.concatenate([noise, x, np.broadcast_to(pooled[:, None, :], (b, n, pooled.shape[-1]))], axis=-1)
    if p.rho is None:
        return h, cache
    y, cache.rho_cache = mlp_forward_cached(p.rho, h, bitexact)
    return y, cache


def _pool_backward(p: SetLayerParams, cache: _Cache, dpooled: np.ndarray) -> np.ndarray:
    emb = cache.emb
    m = emb.shape[1]
    if p.pooling == "sum":
        return np.broadcast_to(dpooled[:, None, :], emb.shape).copy()
    if p.pooling in ("mean", "ustat"):
        return np.broadcast_to(dpooled[:, None, :] / m, emb.shape).copy()
    if p.pooling == "max":
        hit = np.argmax(emb, axis=1)
        out = np.zeros_like(emb)
        np.put_along_axis(out, hit[:, None, :], dpooled[:, None, :], axis=1)
        return out
    top = emb.max(axis=1, keepdims=True)
    w = np.exp(emb - top)
    w /= w.sum(axis=1, keepdims=True)
    return w * dpooled[:, None, :]


def set_layer_backward(p: SetLayerParams, cache: _Cache, dy) -> Tuple[SetLayerGrads, np.ndarray]:
    """Gradients of ``sum(dy * y)`` with respect to parameters and ``x``."""
    dy = np.asarray(dy, dtype=np.float64)
    x = cache.x
    b, n, d = x.shape
    if p.linear is not None:
        total = cache.pooled
        g0 = float(np.sum(dy * x))
        g1 = float(np.sum(dy * total[:, None, :]))
        dx = p.linear[0] * dy + p.linear[1] * dy.sum(axis=1, keepdims=True)
        return SetLayerGrads(linear=(g0, g1)), dx

    grads = SetLayerGrads()
    if p.rho is not None:
        grads.rho = mlp_backward_cached(p.rho, cache.rho_cache, dy)
        dh = grads.rho.x
    else:
        dh = dy
    nd = p.noise_dims
    dx = np.zeros_like(x)
    if p.mode == "invariant":
        dpooled = dh[:, nd:]
    else:
        dx += dh[:, :, nd:nd + d]
        dpooled = dh[:, :, nd + d:].sum(axis=1)

    demb = _pool_backward(p, cache, dpooled)
    if p.phi is not None:
        grads.phi = mlp_backward_cached(p.phi, cache.phi_cache, demb)
        dphi_in = grads.phi.x
    else:
        dphi_in = demb
    if p.pooling == "ustat":
        dtup = dphi_in.reshape(cache.pos.shape + (d,))
        pos = cache.pos.reshape(b, -1)
        rows = np.repeat(np.arange(b), pos.shape[1])
        np.add.at(dx, (rows, pos.ravel()), dtup.reshape(-1, d))
    else:
        dx += dphi_in
    return grads, dx


def _restore(y: np.ndarray, kind: int, mode: str, squeeze_scalar: bool) -> np.ndarray:
    if kind == 3:
        return y
    y = y[0]
    if kind == 1 and mode == "equivariant" and squeeze_scalar and y.shape[-1] == 1:
        return y[:, 0]
    return y


def invariant_set_layer(p: SetLayerParams, x, src: Optional[NoiseSource] = None, noise=None,
                        bitexact: bool = False) -> np.ndarray:
    """``rho([eta, pool(phi(x_j))])``; output does not depend on element order."""
    if p.mode != "invariant":
        raise ValueError("params are for an equivariant layer")
    xb, kind = _as_batch(x)
    if xb.shape[1] == 0:
        raise ShapeError("empty set")
    if noise is None:
        noise = draw_set_noise(p, src, xb.shape[0] if kind == 3 else None, xb.shape[1])
    noise = np.asarray(noise, dtype=np.float64)
    if kind != 3:
        noise = noise[None]
    y, _ = set_layer_forward(p, xb, noise, src, bitexact)
    return _restore(y, kind, p.mode, True)


def equivariant_set_layer(p: SetLayerParams, x, src: Optional[NoiseSource] = None, noise=None,
                          bitexact: bool = False) -> np.ndarray:
    """``y_i = rho([eta_i, x_i, pool(phi(x_j))])`` (or the linear form)."""
    if p.mode != "equivariant":
        raise ValueError("params are for an invariant layer")
    xb, kind = _as_batch(x)
    if xb.shape[1] == 0:
        raise ShapeError("empty set")
    if noise is None:
        noise = draw_set_noise(p, src, xb.shape[0] if kind == 3 else None, xb.shape[1])
    noise = np.asarray(noise, dtype=np.float64)
    if kind != 3:
        noise = noise[None]
    y, _ = set_layer_forward(p, xb, noise, src, bitexact)
    return _restore(y, kind, p.mode, True)


def linear_set_layer(theta0: float, theta1: float) -> SetLayerParams:
    """The equivariant linear map ``theta0 * I + theta1 * 1 1^T``."""
    return SetLayerParams(mode="equivariant", linear=(theta0, theta1))
