"""Finite-rank Toeplitz moment matrices: rank detection and point-support recovery."""

__version__ = "0.1.0"
