"""Numerical analysis of differences of weighted composition operators
between weighted-type spaces on the unit ball of C^n."""

__version__ = "0.1.0"
