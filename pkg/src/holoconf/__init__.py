"""Holomorphic tensor calculus for complex-Riemannian 3- and 4-manifolds."""

__version__ = "0.1.0"
