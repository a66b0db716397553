"""Exact analysis of imperfect one-period markets over a finite sample space."""

__version__ = "0.1.0"
