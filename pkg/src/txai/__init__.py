"""Temporal type-2 fuzzy sets and time-dependent explainable classification."""

__version__ = "0.1.0"
