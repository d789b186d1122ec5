"""Harmonic analysis toolkit for the pseudounitary groups U(p, q)."""

__version__ = "0.1.0"
