"""Synthetic omnidirectional images from analytic camera models."""
__version__ = "0.1.0"
