"""Desk-scale testbed for shape bias, stylization, and corruption robustness."""

__version__ = "0.1.0"
