"""Nonadapted invariant measures for expanding Markov interval maps."""

__version__ = "0.1.0"
