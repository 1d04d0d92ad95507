"""Betti number growth along towers of finite normal covers."""

__version__ = "0.1.0"
