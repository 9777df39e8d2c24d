"""Counter-based uniform noise built on splitmix64.

A :class:`NoiseSource` is an immutable value ``(seed, stream_id, counter)``.
Draw ``k`` of a stream is ``mix(state0 + (k + 1) * GOLDEN)`` where ``state0``
depends only on ``(seed, stream_id)``, so any draw is addressable without
replaying the stream.  Substreams are keyed by a hash of the parent stream id
and a multi-index, independent of how many values the parent has produced.

The scalar path uses Python integers; :func:`noise_grid` and
:func:`noise_block` are vectorised with ``numpy.uint64`` and produce the same
bits.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_STREAM_SALT = 0xD1B54A32D192ED03
_FORK_SALT = 0x8CB92BA72F3D8DD7
_TWO_M53 = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_C1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_C2)
    return z ^ (z >> np.uint64(31))


def _state0(seed: int, stream_id: int) -> int:
    return mix64((seed & MASK64) ^ mix64(stream_id ^ _STREAM_SALT))


def _to_unit(z: int) -> float:
    return (z >> 11) * _TWO_M53


def _fork_id(stream_id: int, index: Sequence[int]) -> int:
    h = mix64(stream_id ^ _FORK_SALT)
    h = mix64(h ^ len(index))
    for c in index:
        h = mix64(((h + GOLDEN) & MASK64) ^ c)
    return h


@dataclass(frozen=True)
class NoiseSource:
    """Immutable position in a uniform [0, 1) stream.

    ``bounds``, when set, declares the valid range of multi-indices accepted
    by :func:`noise_fork`.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0
    bounds: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        for name in ("seed", "stream_id", "counter"):
            v = getattr(self, name)
            if not 0 <= v <= MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v}")

    def with_bounds(self, *bounds: int) -> "NoiseSource":
        return replace(self, bounds=tuple(int(b) for b in bounds))

    def fork(self, *index: int) -> "NoiseSource":
        return noise_fork(self, index)


def noise_value(src: NoiseSource, k: int) -> float:
    """Draw number ``k`` (0-based) of the stream, regardless of ``src.counter``."""
    z = mix64(_state0(src.seed, src.stream_id) + ((k + 1) * GOLDEN & MASK64))
    return _to_unit(z)


def noise_next(src: NoiseSource) -> Tuple[float, NoiseSource]:
    """Return the next uniform draw and the advanced source."""
    return noise_value(src, src.counter), replace(src, counter=src.counter + 1)


def noise_block(src: NoiseSource, count: int) -> Tuple[np.ndarray, NoiseSource]:
    """``count`` consecutive draws as an array, plus the advanced source."""
    ks = np.arange(src.counter + 1, src.counter + count + 1, dtype=np.uint64)
    z = _mix64_np(np.uint64(_state0(src.seed, src.stream_id)) + ks * np.uint64(GOLDEN))
    out = (z >> np.uint64(11)).astype(np.float64) * _TWO_M53
    return out, replace(src, counter=src.counter + count)


def noise_fork(src: NoiseSource, index) -> NoiseSource:
    """Substream keyed by ``index`` (an int or a tuple of ints).

    The result depends on ``(seed, stream_id, index)`` only, never on the
    parent's counter.
    """
    if isinstance(index, (int, np.integer)):
        index = (int(index),)
    index = tuple(int(i) for i in index)
    if src.bounds is not None:
        if len(index) != len(src.bounds) or any(not 0 <= i < b for i, b in zip(index, src.bounds)):
            raise IndexError(f"fork index {index} outside declared bounds {src.bounds}")
    if any(i < 0 or i > MASK64 for i in index):
        raise IndexError(f"fork index {index} must be non-negative")
    return NoiseSource(src.seed, _fork_id(src.stream_id, index))


def noise_grid(src: NoiseSource, index_shape: Sequence[int], dims: int,
               symmetric: bool = False) -> np.ndarray:
    """Array of shape ``index_shape + (dims,)`` with ``[idx, k]`` equal to
    draw ``k`` of ``src.fork(idx)``.

    With ``symmetric=True`` (two-axis grids) the index is sorted before
    forking so that the result is symmetric in its first two axes.
    """
    index_shape = tuple(int(s) for s in index_shape)
    if symmetric and (len(index_shape) != 2 or index_shape[0] != index_shape[1]):
        raise ValueError("symmetric noise needs a square two-axis index grid")
    count = int(np.prod(index_shape, dtype=np.int64))
    if dims == 0 or count == 0:
        return np.zeros(index_shape + (dims,))
    if index_shape:
        grids = np.indices(index_shape).reshape(len(index_shape), -1).astype(np.uint64)
    else:
        grids = np.zeros((0, 1), dtype=np.uint64)
    if symmetric:
        grids = np.sort(grids, axis=0)
    h = np.full(count, mix64(mix64(src.stream_id ^ _FORK_SALT) ^ len(index_shape)), dtype=np.uint64)
    for row in grids:
        h = _mix64_np((h + np.uint64(GOLDEN)) ^ row)
    state0 = _mix64_np(np.uint64(src.seed & MASK64) ^ _mix64_np(h ^ np.uint64(_STREAM_SALT)))
    ks = np.arange(1, dims + 1, dtype=np.uint64) * np.uint64(GOLDEN)
    z = _mix64_np(state0[:, None] + ks[None, :])
    out = (z >> np.uint64(11)).astype(np.float64) * _TWO_M53
    return out.reshape(index_shape + (dims,))
