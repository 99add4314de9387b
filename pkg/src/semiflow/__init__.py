"""Regularity classes of C0-semigroups generated by scalar type spectral operators."""

__version__ = "0.1.0"
