"""Solvers and benchmarks for pseudomonotone equilibrium problems."""

__version__ = "0.1.0"
