"""Vacuum Bell-CHSH, Mermin-3 and cluster correlators of a 1+1D massive scalar field."""

__version__ = "0.1.0"
