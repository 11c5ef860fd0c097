"""Spectral ground states and Crank-Nicolson dynamics for NLS on the unit ball."""

__version__ = "0.1.0"
