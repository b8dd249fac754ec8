"""Numerical engine and identity harness for lightlike hypersurfaces of
statistical manifolds."""

__version__ = "0.1.0"
