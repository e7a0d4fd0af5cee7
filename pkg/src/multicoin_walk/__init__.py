"""Discrete-time quantum walks on a line with one or many Hadamard coins."""

__version__ = "0.1.0"
