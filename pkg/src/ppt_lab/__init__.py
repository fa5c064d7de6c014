"""Exact group actions on trees, the hyperbolic plane and quasi-lines."""

__version__ = "0.1.0"
