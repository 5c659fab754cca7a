"""Numerical laboratory for cohomogeneity-one G2 metrics and instantons."""

__version__ = "0.1.0"
