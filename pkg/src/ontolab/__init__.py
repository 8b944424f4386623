"""Numerical laboratory for ontological (hidden-variable) models of quantum mechanics."""

__version__ = "0.1.0"
