"""Least-squares Pade approximation of Hilbert-space-valued frequency responses."""

__version__ = "0.1.0"
