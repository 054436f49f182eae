"""Continuous-time quantum walks on Z, Z^d and homogeneous trees."""

__version__ = "0.1.0"
