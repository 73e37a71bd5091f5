"""Propagation, link-budget, coverage, sensing and band-hopping models for
the 7.125-24.25 GHz upper mid-band (FR3)."""

__version__ = "0.1.0"
