"""Numerical laboratory for monotone limits of sub-Markovian kernel-operator semigroups."""

__version__ = "0.1.0"
