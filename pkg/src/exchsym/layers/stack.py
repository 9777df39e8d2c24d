"""Composition of set layers.

A stack is a chain of equivariant set layers optionally closed by one
invariant layer.  Layer ``l`` draws its noise from ``src.fork(l)`` so the
streams of different layers never overlap.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..numkit import MlpParams, NoiseSource, ShapeError
from .sets import (SetLayerParams, _as_batch, _restore, draw_set_noise, set_layer_backward,
                   set_layer_forward)


@dataclass
class LayerStack:
    layers: List[SetLayerParams] = field(default_factory=list)

    def __post_init__(self):
        for k, layer in enumerate(self.layers[:-1]):
            if layer.mode == "invariant":
                raise ValueError(f"invariant layer {k} must be the last one")

    @property
    def invariant(self) -> bool:
        return bool(self.layers) and self.layers[-1].mode == "invariant"

    def check(self, d_in: int) -> int:
        """Validate the shape chain; return the output width."""
        d = d_in
        for k, layer in enumerate(self.layers):
            try:
                layer.check(d)
            except ShapeError as e:
                raise ShapeError(f"layer {k}: {e}") from None
            d = layer.out_dim(d)
        return d

    def copy(self) -> "LayerStack":
        return LayerStack([layer.copy() for layer in self.layers])


def draw_stack_noise(s: LayerStack, src: Optional[NoiseSource], batch: Optional[int], n: int) -> list:
    """Per-layer noise arrays, layer ``l`` from ``src.fork(l)``."""
    return [draw_set_noise(layer, src.fork(k) if src is not None else None, batch, n)
            for k, layer in enumerate(s.layers)]


def stack_forward_batch(s: LayerStack, x: np.ndarray, noise: list, src: Optional[NoiseSource] = None,
                        bitexact: bool = False):
    """Forward pass on ``(B, n, d)`` with explicit batched noise; returns ``(y, caches)``."""
    s.check(x.shape[-1])
    caches = []
    h = x
    for k, (layer, eta) in enumerate(zip(s.layers, noise)):
        h, cache = set_layer_forward(layer, h, eta, src.fork(k) if src is not None else None, bitexact)
        caches.append(cache)
    return h, caches


def stack_backward(s: LayerStack, caches: list, dy: np.ndarray):
    """Per-layer parameter gradients and the input gradient."""
    grads = [None] * len(s.layers)
    for k in range(len(s.layers) - 1, -1, -1):
        grads[k], dy = set_layer_backward(s.layers[k], caches[k], dy)
    return grads, dy


def stack_forward(s: LayerStack, x, src: Optional[NoiseSource] = None, noise: Optional[list] = None,
                  bitexact: bool = False) -> np.ndarray:
    """Apply every layer in turn.  ``noise`` (one array per layer, without a
    batch axis for unbatched input) overrides draws from ``src``."""
    if not s.layers:
        return np.asarray(x, dtype=np.float64)
    xb, kind = _as_batch(x)
    batched = kind == 3
    if noise is None:
        noise = draw_stack_noise(s, src, xb.shape[0] if batched else None, xb.shape[1])
    if len(noise) != len(s.layers):
        raise ShapeError(f"{len(noise)} noise arrays for {len(s.layers)} layers")
    noise = [np.asarray(e, dtype=np.float64) if batched else np.asarray(e, dtype=np.float64)[None]
             for e in noise]
    y, _ = stack_forward_batch(s, xb, noise, src, bitexact)
    return _restore(y, kind, s.layers[-1].mode, True)


def layer_to_dict(p: SetLayerParams) -> dict:
    return {
        "phi": p.phi.to_dict() if p.phi is not None else None,
        "rho": p.rho.to_dict() if p.rho is not None else None,
        "pooling": p.pooling,
        "k": p.k,
        "noise_dims": p.noise_dims,
        "mode": p.mode,
        "linear": list(p.linear) if p.linear is not None else None,
    }


def layer_from_dict(d: dict) -> SetLayerParams:
    return SetLayerParams(
        phi=MlpParams.from_dict(d["phi"]) if d.get("phi") else None,
        rho=MlpParams.from_dict(d["rho"]) if d.get("rho") else None,
        pooling=d.get("pooling", "sum"),
        k=d.get("k", 2),
        noise_dims=d.get("noise_dims", 0),
        mode=d.get("mode", "invariant"),
        linear=tuple(d["linear"]) if d.get("linear") is not None else None,
    )


def stack_to_dict(s: LayerStack) -> dict:
    return {"layers": [layer_to_dict(layer) for layer in s.layers]}


def stack_from_dict(d: dict) -> LayerStack:
    return LayerStack([layer_from_dict(layer) for layer in d["layers"]])
