"""Resonance classification of orbital time series with wavefront-parallel search."""

__version__ = "0.1.0"
