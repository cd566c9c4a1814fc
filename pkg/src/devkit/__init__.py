"""Exact module theory over small chain rings, with semilinear structure."""

__version__ = "0.1.0"
