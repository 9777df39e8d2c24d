"""Permutation-invariant and -equivariant stochastic layers with exact symmetry tooling."""

__version__ = "0.1.0"
