"""Plain minibatch SGD for layer stacks and synthetic exchangeable datasets."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..numkit import MlpGrads, MlpParams, NoiseSource, ShapeError, noise_block, noise_grid
from .matrices import MatrixLayerParams, exch_matrix_layer
from .stack import LayerStack, draw_stack_noise, stack_backward, stack_forward_batch

SET_TASKS = ("sum", "mean", "max", "variance")


class TrainingDivergedError(RuntimeError):
    """The loss became NaN or infinite."""


@dataclass
class TrainResult:
    stack: LayerStack
    loss_trace: List[float] = field(default_factory=list)
    final_loss: float = float("nan")


def _as_xb(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[..., None] if x.ndim == 2 else x


def _as_yb(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return y[:, None] if y.ndim == 1 else y


def _step_mlp(p: MlpParams, g: MlpGrads, lr: float) -> None:
    p.weights = [w - lr * gw for w, gw in zip(p.weights, g.weights)]
    p.biases = [b - lr * gb for b, gb in zip(p.biases, g.biases)]


def _apply(stack: LayerStack, grads, lr: float) -> None:
    for layer, g in zip(stack.layers, grads):
        if g.phi is not None:
            _step_mlp(layer.phi, g.phi, lr)
        if g.rho is not None:
            _step_mlp(layer.rho, g.rho, lr)
        if g.linear is not None:
            layer.linear = (layer.linear[0] - lr * g.linear[0], layer.linear[1] - lr * g.linear[1])


def evaluate_mse(stack: LayerStack, x, y, src: Optional[NoiseSource] = None, bitexact: bool = False) -> float:
    """Mean squared error of an invariant stack on ``(B, n[, d])`` inputs."""
    xb, yb = _as_xb(x), _as_yb(y)
    noise = draw_stack_noise(stack, src, xb.shape[0], xb.shape[1])
    pred, _ = stack_forward_batch(stack, xb, noise, src, bitexact)
    return float(np.mean((pred - yb) ** 2))


def sgd_train(stack: LayerStack, x, y, epochs: int, lr: float, seed: int, batch_size: int = 32) -> TrainResult:
    """Train an invariant stack with squared loss.

    The input stack is not modified.  Minibatch order and layer noise come
    from ``NoiseSource(seed)``: epoch ``e`` shuffles with ``fork(e)`` and
    step ``t`` of that epoch draws layer noise from ``fork(e, t)``.
    ``loss_trace[e]`` is the full-data loss after ``e`` epochs (entry 0 is
    the initial loss).
    """
    if not stack.invariant:
        raise ValueError("training needs a stack ending in an invariant layer")
    xb, yb = _as_xb(x), _as_yb(y)
    if xb.shape[0] != yb.shape[0]:
        raise ShapeError(f"{xb.shape[0]} inputs but {yb.shape[0]} targets")
    out_dim = stack.check(xb.shape[-1])
    if out_dim != yb.shape[1]:
        raise ShapeError(f"stack outputs {out_dim} values, targets have {yb.shape[1]}")
    model = stack.copy()
    root = NoiseSource(seed)
    eval_src = root.fork(2 ** 32)
    size = xb.shape[0]
    trace = [evaluate_mse(model, xb, yb, eval_src)]
    for epoch in range(epochs):
        u, _ = noise_block(root.fork(epoch), size)
        order = np.argsort(u, kind="stable")
        for t, start in enumerate(range(0, size, batch_size)):
            idx = order[start:start + batch_size]
            xs, ys = xb[idx], yb[idx]
            step_src = root.fork(epoch, t)
            noise = draw_stack_noise(model, step_src, xs.shape[0], xs.shape[1])
            pred, caches = stack_forward_batch(model, xs, noise, step_src)
            dy = 2.0 * (pred - ys) / pred.size
            grads, _ = stack_backward(model, caches, dy)
            _apply(model, grads, lr)
        loss = evaluate_mse(model, xb, yb, eval_src)
        if not np.isfinite(loss):
            raise TrainingDivergedError(f"loss became {loss} in epoch {epoch}")
        trace.append(loss)
    return TrainResult(model, trace, trace[-1])


def set_dataset(task: str, count: int, set_size: int, src: NoiseSource):
    """Sets of Unif[0, 1] values and a permutation-invariant target.

    ``variance`` is the unbiased sample variance.  Returns ``(x, y)`` with
    shapes ``(count, set_size)`` and ``(count,)``.
    """
    if task not in SET_TASKS:
        raise ValueError(f"unknown task {task!r}; choose from {SET_TASKS}")
    x = noise_grid(src, (count,), set_size)
    if task == "sum":
        y = x.sum(axis=1)
    elif task == "mean":
        y = x.mean(axis=1)
    elif task == "max":
        y = x.max(axis=1)
    else:
        y = x.var(axis=1, ddof=1)
    return x, y


def matrix_dataset(count: int, shape, thetas, src: NoiseSource, noise_scale: float = 0.0):
    """Uniform random matrices and targets from a linear exchangeable layer
    with coefficients ``thetas``, plus optional uniform noise on ``[-s, s]``."""
    x = noise_grid(src.fork(0), (count,), int(np.prod(shape))).reshape((count,) + tuple(shape))
    p = MatrixLayerParams(thetas=tuple(thetas))
    y = np.stack([exch_matrix_layer(p, m) for m in x])
    if noise_scale:
        y = y + noise_scale * (2.0 * noise_grid(src.fork(1), (count,) + tuple(shape), 1)[..., 0] - 1.0)
    return x, y


def matrix_features(x: np.ndarray) -> np.ndarray:
    """The five pooled regressors ``(1, X, rowsum, colsum, total)`` per entry."""
    ones = np.ones_like(x)
    rows = np.broadcast_to(x.sum(axis=-1, keepdims=True), x.shape)
    cols = np.broadcast_to(x.sum(axis=-2, keepdims=True), x.shape)
    total = np.broadcast_to(x.sum(axis=(-2, -1), keepdims=True), x.shape)
    return np.stack([ones, x, rows, cols, total], axis=-1)


def fit_matrix_layer(x, y, epochs: int, lr: float, seed: int, batch_size: int = 32):
    """SGD fit of the linear matrix layer (identity activation) to ``(x, y)``.

    Returns ``(MatrixLayerParams, loss_trace)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    feats = matrix_features(x)
    theta = np.zeros(5)
    root = NoiseSource(seed)

    def loss(t):
        return float(np.mean((feats @ t - y) ** 2))

    trace = [loss(theta)]
    for epoch in range(epochs):
        u, _ = noise_block(root.fork(epoch), x.shape[0])
        order = np.argsort(u, kind="stable")
        for start in range(0, x.shape[0], batch_size):
            idx = order[start:start + batch_size]
            f, r = feats[idx], feats[idx] @ theta - y[idx]
            grad = 2.0 * (f.reshape(-1, 5).T @ r.ravel()) / r.size
            theta = theta - lr * grad
        trace.append(loss(theta))
        if not np.isfinite(trace[-1]):
            raise TrainingDivergedError(f"loss became {trace[-1]} in epoch {epoch}")
    return MatrixLayerParams(thetas=tuple(theta)), trace
