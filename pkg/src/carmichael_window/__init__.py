"""Desk-scale construction and certification of Carmichael numbers."""

__version__ = "0.1.0"
