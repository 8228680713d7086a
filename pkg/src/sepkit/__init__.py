"""Finite-domain workbench for separation-style program logics."""

__version__ = "0.1.0"
