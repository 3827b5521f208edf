"""Reproducing-kernel families and asymptotic-orthonormality diagnostics on C+."""

__version__ = "0.1.0"

NORMALIZATION_TAG = "i-over-2pi"
