"""Cohomology of homogeneous bundles on flag supermanifolds and their rigidity."""

__version__ = "0.1.0"
