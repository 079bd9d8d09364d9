"""Regularized Benders decomposition for block-structured capacity-expansion models."""

__version__ = "0.1.0"
