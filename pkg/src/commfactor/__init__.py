"""Commutator factorizations of trace-zero matrices with norm certificates."""

__version__ = "0.1.0"
