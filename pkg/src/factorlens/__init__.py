"""Sparse linear factor explanation toolkit."""

__version__ = "0.1.0"
