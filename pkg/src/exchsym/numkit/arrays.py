"""Dense float64 arrays.

Arrays throughout the package are plain ``numpy.ndarray`` objects of dtype
float64.  :func:`dense` is the single validating constructor: it rejects
non-finite entries and shape/data mismatches.
"""

import numpy as np


class ShapeError(ValueError):
    """Raised when array shapes are inconsistent with an operation."""


def dense(data, shape=None) -> np.ndarray:
    """Build a validated float64 array.

    ``data`` may be nested lists, an array, or a flat sequence combined with
    ``shape`` (row-major).
    """
    arr = np.array(data, dtype=np.float64)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if any(s < 0 for s in shape):
            raise ShapeError(f"negative dimension in shape {shape}")
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ShapeError(f"{arr.size} values do not fill shape {shape}")
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ValueError("array contains NaN or Inf")
    return np.ascontiguousarray(arr)


def is_symmetric(x: np.ndarray) -> bool:
    """True if ``x`` is square in its first two axes and equal to its transpose."""
    return x.ndim >= 2 and x.shape[0] == x.shape[1] and bool(np.array_equal(x, np.swapaxes(x, 0, 1)))


def lex_key(x: np.ndarray) -> tuple:
    """Row-major flattening as a tuple; Python tuple order is the lex order."""
    return tuple(np.asarray(x, dtype=np.float64).ravel().tolist())
