"""Frequency response of linearly coupled networked systems."""

__version__ = "0.1.0"
