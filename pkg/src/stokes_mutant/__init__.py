"""Stokes data, mutation systems and the braid-group action, with a numerical
check of the Dubrovin-type statement for Fano complete intersections."""

__version__ = "0.1.0"
