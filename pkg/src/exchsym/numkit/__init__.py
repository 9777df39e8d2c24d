from .arrays import ShapeError, dense, is_symmetric, lex_key
from .mlp import (ACTIVATIONS, GradReport, MlpGrads, MlpParams, grad_check, mlp_backward,
                  mlp_backward_cached, mlp_forward, mlp_forward_cached, mlp_identity,
                  mlp_init, mlp_linear)
from .noise import (NoiseSource, mix64, noise_block, noise_fork, noise_grid, noise_next,
                    noise_value)

__all__ = [
    "ShapeError", "dense", "is_symmetric", "lex_key",
    "ACTIVATIONS", "GradReport", "MlpGrads", "MlpParams", "grad_check", "mlp_backward",
    "mlp_backward_cached", "mlp_forward", "mlp_forward_cached", "mlp_identity", "mlp_init",
    "mlp_linear",
    "NoiseSource", "mix64", "noise_block", "noise_fork", "noise_grid", "noise_next", "noise_value",
]
