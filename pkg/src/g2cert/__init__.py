"""Exact-arithmetic certification toolkit for obstructions to invariant
exact G2-structures on seven-dimensional Lie groups."""

__version__ = "0.1.0"
