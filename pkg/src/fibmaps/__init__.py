"""Fibonacci unimodal maps: parameter search, renormalization, puzzle geometry and rigidity diagnostics."""

__version__ = "0.1.0"
