"""A small dense MLP with hand-written reverse-mode gradients.

Weights are stored as ``(out, in)`` matrices; a layer computes
``act(x @ W.T + b)``.  Inputs may carry any number of leading batch axes,
parameter gradients are summed over them.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .arrays import ShapeError
from .noise import NoiseSource, noise_block

ACTIVATIONS = ("relu", "tanh", "identity")


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, a):
    if name == "relu":
        return (z > 0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


@dataclass
class MlpParams:
    """Weights, biases and activations of a dense network.

    ``activation`` is applied after every hidden layer and
    ``output_activation`` after the last one.
    """

    layer_sizes: tuple
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    activation: str = "tanh"
    output_activation: str = "identity"

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2 or any(s < 1 for s in self.layer_sizes):
            raise ShapeError(f"bad layer sizes {self.layer_sizes}")
        for tag in (self.activation, self.output_activation):
            if tag not in ACTIVATIONS:
                raise ValueError(f"unknown activation {tag!r}")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ShapeError("one weight matrix and bias vector per layer required")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.layer_sizes[k + 1], self.layer_sizes[k])
            if w.shape != want or b.shape != (want[0],):
                raise ShapeError(f"layer {k}: weight {w.shape} / bias {b.shape}, expected {want}")

    @property
    def n_in(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_out(self) -> int:
        return self.layer_sizes[-1]

    def activation_of(self, k: int) -> str:
        return self.output_activation if k == len(self.weights) - 1 else self.activation

    def flat(self) -> np.ndarray:
        """All parameters in a single vector (layer by layer, W then b)."""
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])

    def with_flat(self, theta: np.ndarray) -> "MlpParams":
        ws, bs, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            ws.append(np.array(theta[pos:pos + w.size]).reshape(w.shape))
            pos += w.size
            bs.append(np.array(theta[pos:pos + b.size]))
            pos += b.size
        return MlpParams(self.layer_sizes, ws, bs, self.activation, self.output_activation)

    def copy(self) -> "MlpParams":
        return self.with_flat(self.flat())

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "activation": self.activation,
            "output_activation": self.output_activation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpParams":
        return cls(d["layer_sizes"], d["weights"], d["biases"], d.get("activation", "tanh"),
                   d.get("output_activation", "identity"))


@dataclass
class MlpGrads:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    x: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])


def mlp_init(layer_sizes: Sequence[int], src: NoiseSource, activation="tanh",
             output_activation="identity", scale: float = 1.0) -> MlpParams:
    """Glorot-uniform weights and zero biases drawn from ``src``."""
    ws, bs = [], []
    for k in range(len(layer_sizes) - 1):
        n_in, n_out = layer_sizes[k], layer_sizes[k + 1]
        u, _ = noise_block(src.fork(k), n_in * n_out)
        limit = scale * np.sqrt(6.0 / (n_in + n_out))
        ws.append(((2.0 * u - 1.0) * limit).reshape(n_out, n_in))
        bs.append(np.zeros(n_out))
    return MlpParams(tuple(layer_sizes), ws, bs, activation, output_activation)


def mlp_identity(n: int, depth: int = 1) -> MlpParams:
    """Identity weights, zero biases, identity activations."""
    return MlpParams((n,) * (depth + 1), [np.eye(n)] * depth, [np.zeros(n)] * depth,
                     "identity", "identity")


def mlp_linear(weight, bias=None, activation="identity") -> MlpParams:
    """Single affine layer ``act(W x + b)``."""
    w = np.atleast_2d(np.asarray(weight, dtype=np.float64))
    b = np.zeros(w.shape[0]) if bias is None else np.atleast_1d(np.asarray(bias, dtype=np.float64))
    return MlpParams((w.shape[1], w.shape[0]), [w], [b], "identity", activation)


def _check_input(p: MlpParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] != p.n_in:
        raise ShapeError(f"input trailing size {x.shape[-1:] } != {p.n_in}")
    return x


def _affine(a, w, b, rowwise):
    if rowwise:
        # BLAS results can depend on a row's position in the batch; this cannot
        return (a[..., None, :] * w).sum(axis=-1) + b
    return a @ w.T + b


def mlp_forward(p: MlpParams, x, rowwise: bool = False) -> np.ndarray:
    """Forward pass.  ``rowwise`` makes each output row depend only on its
    input row, bit for bit (slower)."""
    a = _check_input(p, x)
    for k, (w, b) in enumerate(zip(p.weights, p.biases)):
        a = _act(p.activation_of(k), _affine(a, w, b, rowwise))
    return a


def _forward_cache(p: MlpParams, x: np.ndarray, rowwise: bool = False):
    acts, pre = [x], []
    a = x
    for k, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = _affine(a, w, b, rowwise)
        a = _act(p.activation_of(k), z)
        pre.append(z)
        acts.append(a)
    return acts, pre


def mlp_backward(p: MlpParams, x, upstream) -> MlpGrads:
    """Exact gradients of ``sum(upstream * mlp_forward(p, x))``."""
    x = _check_input(p, x)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != x.shape[:-1] + (p.n_out,):
        raise ShapeError(f"upstream shape {upstream.shape} does not match output")
    acts, pre = _forward_cache(p, x)
    return _backward_from_cache(p, acts, pre, upstream)


def _backward_from_cache(p, acts, pre, upstream) -> MlpGrads:
    n_layers = len(p.weights)
    gw: List[Optional[np.ndarray]] = [None] * n_layers
    gb: List[Optional[np.ndarray]] = [None] * n_layers
    delta = upstream
    for k in range(n_layers - 1, -1, -1):
        dz = delta * _act_grad(p.activation_of(k), pre[k], acts[k + 1])
        a_in = acts[k]
        gw[k] = dz.reshape(-1, dz.shape[-1]).T @ a_in.reshape(-1, a_in.shape[-1])
        gb[k] = dz.reshape(-1, dz.shape[-1]).sum(axis=0)
        delta = dz @ p.weights[k]
    return MlpGrads(gw, gb, delta)


@dataclass
class GradReport:
    max_rel_error: float
    worst_parameter_index: int
    passed: bool
    tolerance: float = field(default=1e-5)


def _rel_err(a, b):
    # unit floor keeps tiny gradients from turning round-off into failures
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def grad_check(p: MlpParams, x, tol: float = 1e-5, upstream=None, h: float = 1e-5,
               backward=mlp_backward) -> GradReport:
    """Compare ``backward`` with central differences over every parameter and input.

    The worst index counts parameters first (flat order) then input entries.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = _check_input(p, x)
    if upstream is None:
        upstream = np.ones(x.shape[:-1] + (p.n_out,))
    upstream = np.asarray(upstream, dtype=np.float64)
    grads = backward(p, x, upstream)
    analytic = np.concatenate([grads.flat(), np.asarray(grads.x).ravel()])

    theta = p.flat()
    numeric = np.empty(theta.size + x.size)

    def loss_theta(t):
        return float(np.sum(upstream * mlp_forward(p.with_flat(t), x)))

    for i in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        numeric[i] = (loss_theta(tp) - loss_theta(tm)) / (2 * h)
    xf = x.ravel()
    for i in range(x.size):
        xp, xm = xf.copy(), xf.copy()
        xp[i] += h
        xm[i] -= h
        fp = np.sum(upstream * mlp_forward(p, xp.reshape(x.shape)))
        fm = np.sum(upstream * mlp_forward(p, xm.reshape(x.shape)))
        numeric[theta.size + i] = (fp - fm) / (2 * h)

    err = _rel_err(analytic, numeric)
    worst = int(np.argmax(err)) if err.size else -1
    max_err = float(err[worst]) if err.size else 0.0
    return GradReport(max_err, worst, max_err <= tol, tol)


def mlp_forward_cached(p: MlpParams, x, rowwise: bool = False):
    """Forward pass that also returns the activations needed by
    :func:`mlp_backward_cached`."""
    x = _check_input(p, x)
    acts, pre = _forward_cache(p, x, rowwise)
    return acts[-1], (acts, pre)


def mlp_backward_cached(p: MlpParams, cache, upstream) -> MlpGrads:
    acts, pre = cache
    return _backward_from_cache(p, acts, pre, np.asarray(upstream, dtype=np.float64))
