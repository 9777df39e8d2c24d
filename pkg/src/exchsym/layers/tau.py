"""Generic equivariant maps from a representative equivariant.

Sort the input, apply an arbitrary map ``b`` to the sorted sequence, and
move the result back with the sorting permutation.  For inputs with
distinct entries this is exactly equivariant whatever ``b`` is.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..groups import GroupSpec, Permutation, act
from ..invariants import sort_tau
from ..numkit import MlpParams, NoiseSource, ShapeError, mlp_forward, noise_grid


@dataclass(frozen=True)
class TauResult:
    y: np.ndarray
    tau: Permutation
    ties: bool

    @property
    def warning(self) -> Optional[str]:
        if self.ties:
            return "input has repeated entries; pointwise equivariance is not guaranteed"
        return None


def tau_equivariant_apply(b: MlpParams, x, src: Optional[NoiseSource] = None, noise=None,
                          noise_dims: int = 0) -> TauResult:
    """``y = tau . b([eta, tau^-1 . x])`` with ``tau`` from :func:`sort_tau`.

    ``b`` maps ``noise_dims + n`` inputs to ``n`` outputs.  ``eta`` is one
    noise vector shared by all positions (``src`` itself, unforked).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError("tau construction takes a 1-D sequence")
    n = x.size
    if b.n_in != noise_dims + n or b.n_out != n:
        raise ShapeError(f"b must map {noise_dims + n} inputs to {n} outputs")
    if noise is None:
        if noise_dims and src is None:
            raise ValueError("noise_dims > 0 needs a noise source or noise array")
        noise = noise_grid(src, (), noise_dims) if noise_dims else np.zeros(0)
    tau, rep = sort_tau(x)
    z = mlp_forward(b, np.concatenate([np.asarray(noise, dtype=np.float64), rep]))
    ties = bool(np.any(np.diff(rep) == 0))
    return TauResult(act(tau, z, GroupSpec.seq(n)), tau, ties)
