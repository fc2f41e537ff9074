"""Failure analysis of interval-passing reconstruction."""
__version__ = "0.1.0"
