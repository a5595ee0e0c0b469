"""Parallel-in-time QUBO encoding of few-qubit dynamics."""

__version__ = "0.1.0"
