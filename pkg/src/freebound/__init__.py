"""Exact computations for boundary actions of free groups and their crossed products."""

__version__ = "0.1.0"
