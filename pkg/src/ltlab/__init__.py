"""Numerical laboratory for the planar linked-twist map on two annuli."""

__version__ = "0.1.0"
