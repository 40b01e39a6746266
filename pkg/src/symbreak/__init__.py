"""Equivariant degree criteria and Galerkin verification for symmetry breaking
in non-cooperative elliptic systems on the disc and the ball."""

__version__ = "0.1.0"
