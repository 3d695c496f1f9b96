"""Multiplicity statistics of conditioned Bienaymé–Galton–Watson trees."""

__version__ = "0.1.0"
