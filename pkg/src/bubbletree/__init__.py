"""Exact computations with rank-two families on a 3-dimensional germ and their bubbles."""

__version__ = "0.1.0"
