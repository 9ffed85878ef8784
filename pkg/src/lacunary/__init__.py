"""Limit theorems for lacunary trigonometric and Walsh series, numerically."""

__version__ = "0.1.0"
