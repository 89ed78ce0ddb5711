"""Exact computer algebra for the symplectic fermion vertex superalgebra."""

__version__ = "0.1.0"
