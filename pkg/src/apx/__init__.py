"""Trigonometric approximation in weighted Lebesgue spaces on the circle."""

__version__ = "0.1.0"
